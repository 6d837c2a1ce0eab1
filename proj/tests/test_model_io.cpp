#include "doctest.h"
#include "maganiso/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace maganiso;

namespace {

std::filesystem::path models_dir() { return MAGANISO_MODELS_DIR; }

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream os(p);
    os << text;
    return p;
}

errc load_error(const std::filesystem::path& p) {
    try {
        (void)load_model(p);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected load_model to throw for ", p.filename().string());
    return errc::UsageError;
}

}  // namespace

TEST_CASE("loading the bundled fixtures") {
    const auto lin = load_model(models_dir() / "lin_n2.json");
    CHECK(lin.frame == Frame::Coenergy);
    REQUIRE(std::holds_alternative<ImplicitModel>(lin.model));
    CHECK(solve_level(std::get<ImplicitModel>(lin.model), Vec2{2.0, 1.0}) ==
          doctest::Approx(1.0).epsilon(1e-14));

    const auto pn = load_model(models_dir() / "pnorm_n13_3.json");
    REQUIRE(std::holds_alternative<PNormModel>(pn.model));
    CHECK(std::get<PNormModel>(pn.model).exponent == doctest::Approx(13.0 / 3.0));
    CHECK(value(std::get<PNormModel>(pn.model), Vec2{1.0, 1.0}) ==
          doctest::Approx(0.51129848589856339).epsilon(1e-14));

    const auto pair = load_model(models_dir() / "pair_n13_3.json");
    CHECK(pair.frame == Frame::Energy);
}

TEST_CASE("csv-backed axes resolve relative to the model file") {
    const auto steel = load_model(models_dir() / "steel.json");
    REQUIRE(std::holds_alternative<ImplicitModel>(steel.model));
    const auto& m = std::get<ImplicitModel>(steel.model);
    // on-axis law reproduces a tabulated sample of the rolling-direction curve
    const auto ev = law_evaluation(m, Vec2{400.0, 0.0}, false);
    CHECK(ev.gradient.x1 == doctest::Approx(0.898023).epsilon(1e-12));
    CHECK(ev.gradient.x2 == 0.0);
    // variable exponent: level-dependent e must differ between small and large fields
    CHECK(solve_level(m, Vec2{30.0, 30.0}) > 0.0);
}

TEST_CASE("solver options flow through the json block") {
    const auto p = write_temp("mio_solver.json", R"({
      "frame": "coenergy",
      "axis1": {"linear": 2.0},
      "axis2": {"linear": 1.0},
      "exponent": {"constant": 2.0},
      "solver": {"abs_tol": 1e-13, "rel_tol": 1e-11, "max_iter": 77}
    })");
    const auto lm = load_model(p);
    const auto& m = std::get<ImplicitModel>(lm.model);
    CHECK(m.solver.abs_tol == 1e-13);
    CHECK(m.solver.rel_tol == 1e-11);
    CHECK(m.solver.max_iter == 77);
}

TEST_CASE("model hash is the fnv-1a of the raw bytes, stable across loads") {
    const auto file = models_dir() / "lin_n2.json";
    const auto a = load_model(file);
    const auto b = load_model(file);
    CHECK(a.hash == b.hash);
    CHECK(a.hash == detail::fnv1a64(read_file(file)));
    const auto other = load_model(models_dir() / "lin_n13_3.json");
    CHECK(a.hash != other.hash);
    CHECK(hash_hex(a.hash).size() == 16);
    CHECK(hash_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("schema violations raise ConfigParseError") {
    CHECK(load_error(write_temp("mio_nojson.json", "not json at all")) ==
          errc::ConfigParseError);
    CHECK(load_error(write_temp("mio_noframe.json", R"({"axis1":{"linear":1}})")) ==
          errc::ConfigParseError);
    CHECK(load_error(write_temp("mio_badframe.json",
                                R"({"frame":"both","closed_form":{"pnorm":{"c1":1,"c2":1,"exponent":2}}})")) ==
          errc::ConfigParseError);
    CHECK(load_error(write_temp(
              "mio_badaxis.json",
              R"({"frame":"coenergy","axis1":{"spline":[1]},"axis2":{"linear":1},"exponent":{"constant":2}})")) ==
          errc::ConfigParseError);
    CHECK(load_error(write_temp(
              "mio_badtable.json",
              R"({"frame":"coenergy","axis1":{"linear":1},"axis2":{"linear":1},"exponent":{"table":[[1.0],[2.0,3.0]]}})")) ==
          errc::ConfigParseError);
    CHECK(load_error(write_temp(
              "mio_badsolver.json",
              R"({"frame":"coenergy","axis1":{"linear":1},"axis2":{"linear":1},"exponent":{"constant":2},"solver":3})")) ==
          errc::ConfigParseError);
    CHECK(load_error("/nonexistent/dir/model.json") == errc::ConfigParseError);
}

TEST_CASE("curve construction errors propagate with their own codes") {
    CHECK(load_error(write_temp(
              "mio_negc.json",
              R"({"frame":"coenergy","axis1":{"linear":-2.0},"axis2":{"linear":1},"exponent":{"constant":2}})")) ==
          errc::NonPositiveCoefficient);

    const auto csv = write_temp("mio_nonmono.csv", "h,b\n0,0.0\n1,0.5\n2,0.4\n");
    const auto mj = write_temp(
        "mio_nonmono.json",
        R"({"frame":"coenergy","axis1":{"csv":")" + csv.string() +
            R"("},"axis2":{"linear":1},"exponent":{"constant":2}})");
    CHECK(load_error(mj) == errc::NonMonotoneData);
}

TEST_CASE("curve csv parsing enforces the header and numeric rows") {
    auto curve_error = [](const std::string& name, const std::string& text) {
        try {
            (void)load_curve_csv(write_temp(name, text));
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("expected load_curve_csv to throw");
        return errc::UsageError;
    };
    CHECK(curve_error("mio_nohdr.csv", "0,0\n1,0.5\n") == errc::ConfigParseError);
    CHECK(curve_error("mio_badnum.csv", "h,b\n0,0\nx,0.5\n") == errc::ConfigParseError);
    CHECK(curve_error("mio_shortrow.csv", "h,b\n0,0\n1\n") == errc::ConfigParseError);

    const auto good = load_curve_csv(
        write_temp("mio_good.csv", "# comment line\nh,b\n0,0\n1,0.5\n2,0.8\n"));
    CHECK(good.b(1.0) == doctest::Approx(0.5));
}

TEST_CASE("polyline csv output carries provenance and round-trips doubles") {
    Polyline poly;
    poly.angles = {0.0, 0.5};
    poly.points = {{2.0, 0.0}, {0.25, 0.1}};
    poly.closed = true;
    std::ostringstream os;
    write_polyline_csv(os, poly, "contour", 0xcbf29ce484222325ull);
    CHECK(os.str() ==
          "# maganiso contour cbf29ce484222325\n"
          "theta,x1,x2\n"
          "0.0,2.0,0.0\n"
          "0.5,0.25,0.1\n");
}
