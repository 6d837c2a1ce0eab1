// maganiso: evaluate implicit anisotropic (co)energy models and emit figure-ready data.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maganiso/maganiso.hpp"

namespace {

using namespace maganiso;

Vec2 parse_point(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        fail(errc::UsageError, "expected 'x1,x2' but got '" + s + "'");
    try {
        std::size_t used = 0;
        const double x1 = std::stod(s.substr(0, comma), &used);
        const double x2 = std::stod(s.substr(comma + 1), &used);
        return {x1, x2};
    } catch (const std::exception&) {
        fail(errc::UsageError, "expected 'x1,x2' but got '" + s + "'");
    }
}

std::vector<double> parse_levels(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(errc::UsageError, "bad level list '" + s + "'");
        }
    }
    if (out.empty()) fail(errc::UsageError, "empty level list");
    return out;
}

// All output funnels through a stream so --output and stdout behave identically.
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file.open(path, std::ios::binary);
        if (!file) fail(errc::UsageError, "cannot open output file " + path);
        os = &file;
    }
    std::ostream& out() { return *os; }
};

std::string fmt(double v) { return detail::format_double(v); }

template <class F>
auto with_model(const ModelAny& m, F&& f) {
    return std::visit(std::forward<F>(f), m);
}

void emit_contours(std::ostream& os, const LoadedModel& lm, const std::vector<double>& levels,
                   int samples) {
    os << "# maganiso contour " << hash_hex(lm.hash) << "\n";
    os << "theta,x1,x2\n";
    for (double level : levels) {
        auto poly = with_model(lm.model, [&](const auto& m) {
            return trace_contour(m, level, samples);
        });
        os << "# level " << fmt(level) << "\n";
        for (std::size_t i = 0; i < poly.points.size(); ++i)
            os << fmt(poly.angles[i]) << "," << fmt(poly.points[i].x1) << ","
               << fmt(poly.points[i].x2) << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"implicit interpolation models for anisotropic nonlinear magnetics"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    std::string model_path, output_path, dual_path, point_str, levels_str = "1.0",
                                                              range_str = "0.01,100";
    double bmag = 1.0, hmax = 2.0;
    int samples = 256, grid = 601, triples = 10000, uniq_samples = 512;
    std::vector<double> box_vals;

    auto add_common = [&](CLI::App* sub, bool needs_point) {
        sub->add_option("--model", model_path, "model config JSON")->required();
        sub->add_option("--output", output_path, "write to file instead of stdout");
        if (needs_point) sub->add_option("--point", point_str, "evaluation point x1,x2")->required();
        return sub;
    };

    auto* c_eval = add_common(app.add_subcommand("eval", "level value at a point"), true);
    auto* c_grad = add_common(app.add_subcommand("grad", "gradient (material law) at a point"), true);
    auto* c_hess = add_common(app.add_subcommand("hess", "hessian (differential tensor) at a point"), true);

    auto* c_contour = add_common(app.add_subcommand("contour", "equal-level polylines"), false);
    c_contour->add_option("--levels", levels_str, "comma-separated level values");
    c_contour->add_option("--samples", samples, "vertices per polyline");

    auto* c_locus = add_common(app.add_subcommand("locus", "constant-induction h locus"), false);
    c_locus->add_option("--bmag", bmag, "induction magnitude |b|");
    c_locus->add_option("--samples", samples, "vertices on [0, 2pi)");

    auto* c_hard = add_common(app.add_subcommand("hard-axis", "hardest magnetization direction"), false);
    c_hard->add_option("--bmag", bmag, "induction magnitude |b|");
    c_hard->add_option("--samples", samples, "coarse scan resolution");

    auto* c_conv = add_common(app.add_subcommand("convexity", "hessian/midpoint convexity scan"), false);
    c_conv->add_option("--box", box_vals, "scan region lo1,lo2,hi1,hi2")->expected(4)->delimiter(',');
    c_conv->add_option("--grid", grid, "grid points per side");
    c_conv->add_option("--triples", triples, "random midpoint triples");

    auto* c_uniq = add_common(app.add_subcommand("check-uniqueness", "residual sign changes over a level range"), true);
    c_uniq->add_option("--range", range_str, "level range lo,hi");
    c_uniq->add_option("--samples", uniq_samples, "log-spaced residual samples");

    auto* c_conj = add_common(app.add_subcommand("conjugate-check", "Legendre-transform duality oracle"), false);
    c_conj->add_option("--dual", dual_path, "energy-frame dual model JSON")->required();
    c_conj->add_option("--grid", grid, "oracle grid points per side");
    c_conj->add_option("--hmax", hmax, "test h points span [-hmax,hmax]^2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "UsageError: " << e.what() << "\n";
        return 2;
    }

    LoadedModel lm = load_model(model_path);
    Sink sink(output_path);
    std::ostream& os = sink.out();

    if (c_eval->parsed()) {
        const Vec2 p = parse_point(point_str);
        os << fmt(with_model(lm.model, [&](const auto& m) { return value(m, p); })) << "\n";
    } else if (c_grad->parsed()) {
        const Vec2 p = parse_point(point_str);
        const Vec2 g = with_model(lm.model, [&](const auto& m) { return gradient(m, p); });
        os << fmt(g.x1) << "," << fmt(g.x2) << "\n";
    } else if (c_hess->parsed()) {
        const Vec2 p = parse_point(point_str);
        const auto H = with_model(lm.model, [&](const auto& m) { return hessian(m, p); });
        os << fmt(H.t11) << "," << fmt(H.t12) << "," << fmt(H.t22) << "\n";
    } else if (c_contour->parsed()) {
        emit_contours(os, lm, parse_levels(levels_str), samples);
    } else if (c_locus->parsed()) {
        auto poly = with_model(lm.model, [&](const auto& m) {
            return locus_constant_induction(m, bmag, samples);
        });
        write_polyline_csv(os, poly, "locus", lm.hash);
    } else if (c_hard->parsed()) {
        auto res = with_model(lm.model, [&](const auto& m) { return hard_axis(m, bmag, samples); });
        if (res.degenerate)
            std::cerr << "warning: |h| is constant over directions; hard axis undefined\n";
        os << fmt(res.angle) << "\n";
    } else if (c_conv->parsed()) {
        Box box{{-5, -5}, {5, 5}};
        if (!box_vals.empty()) box = {{box_vals[0], box_vals[1]}, {box_vals[2], box_vals[3]}};
        auto rep = with_model(lm.model, [&](const auto& m) {
            return convexity_scan(m, box, grid, triples);
        });
        nlohmann::json j;
        j["box"] = {box.lo.x1, box.lo.x2, box.hi.x1, box.hi.x2};
        j["grid"] = grid;
        j["min_eigenvalue"] = rep.min_eigenvalue;
        j["min_eigenvalue_at"] = {rep.min_eig_location.x1, rep.min_eig_location.x2};
        j["midpoint_triples"] = rep.midpoint_trials;
        j["midpoint_violations"] = rep.midpoint_violations;
        j["contour_convex"] = nlohmann::json::array();
        for (auto& [level, ok] : rep.contour_convex)
            j["contour_convex"].push_back({{"level", level}, {"convex", ok}});
        j["model_hash"] = hash_hex(lm.hash);
        os << j.dump(2) << "\n";
    } else if (c_uniq->parsed()) {
        const Vec2 p = parse_point(point_str);
        const Vec2 range = parse_point(range_str);
        auto rep = with_model(lm.model, [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ImplicitModel>) {
                return check_uniqueness(m, p, range.x1, range.x2, uniq_samples);
            } else {
                fail(errc::UsageError, "check-uniqueness needs an implicit model");
                return UniquenessReport{};  // unreachable; unifies visitor return type
            }
        });
        nlohmann::json j;
        j["monotone"] = rep.monotone;
        j["sign_changes"] = rep.sign_changes;
        j["sample_levels"] = rep.sample_levels;
        j["model_hash"] = hash_hex(lm.hash);
        os << j.dump(2) << "\n";
    } else if (c_conj->parsed()) {
        LoadedModel dual = load_model(dual_path);
        if (dual.frame == lm.frame)
            fail(errc::UsageError, "conjugate-check needs models in opposite frames");
        // probe h points; the oracle box covers 2.5x the largest gradient excursion
        const int side = 9;
        double bext = 0.0;
        std::vector<Vec2> hs;
        for (int i = 0; i < side; ++i)
            for (int k = 0; k < side; ++k) {
                Vec2 h{-hmax + 2.0 * hmax * i / (side - 1), -hmax + 2.0 * hmax * k / (side - 1)};
                hs.push_back(h);
                const Vec2 b = with_model(lm.model, [&](const auto& m) { return gradient(m, h); });
                bext = std::max(bext, b.norm_inf());
            }
        const GridSpec spec{Box{{-2.5 * bext, -2.5 * bext}, {2.5 * bext, 2.5 * bext}}, grid};
        double max_dev = 0.0;
        for (const Vec2 h : hs) {
            const double direct =
                with_model(lm.model, [&](const auto& m) { return value(m, h); });
            const double viaoracle = with_model(dual.model, [&](const auto& m) {
                return legendre_oracle(m, h, spec);
            });
            max_dev = std::max(max_dev, std::abs(direct - viaoracle));
        }
        os << fmt(max_dev) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == errc::UsageError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
