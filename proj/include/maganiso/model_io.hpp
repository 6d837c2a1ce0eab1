#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "analysis.hpp"
#include "closed_form.hpp"
#include "core.hpp"
#include "implicit_model.hpp"

#include "json.hpp"

namespace maganiso {

using ModelAny = std::variant<ImplicitModel, PNormModel>;

struct LoadedModel {
    ModelAny model;
    std::uint64_t hash = 0;  // FNV-1a of the config file bytes, for output provenance
    Frame frame = Frame::Coenergy;
};

inline std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(errc::ConfigParseError, "cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Measured curve CSV: required header `h,b`, `#` starts a comment, decimal point `.`.
inline PrincipalCurve load_curve_csv(const std::filesystem::path& file) {
    std::istringstream in(read_file(file));
    std::string line;
    bool header_seen = false;
    std::vector<std::pair<double, double>> samples;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        const auto a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        const auto b = line.find_last_not_of(" \t\r\n");
        line = line.substr(a, b - a + 1);
        if (!header_seen) {
            std::string squeezed;
            for (char c : line)
                if (c != ' ' && c != '\t') squeezed += c;
            if (squeezed != "h,b")
                fail(errc::ConfigParseError,
                     file.string() + ": first data line must be the header 'h,b'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(errc::ConfigParseError,
                 file.string() + ":" + std::to_string(lineno) + ": expected 'h,b' pair");
        try {
            std::size_t used = 0;
            const double h = std::stod(line.substr(0, comma), &used);
            const double bv = std::stod(line.substr(comma + 1), &used);
            samples.emplace_back(h, bv);
        } catch (const std::exception&) {
            fail(errc::ConfigParseError,
                 file.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (!header_seen) fail(errc::ConfigParseError, file.string() + ": missing 'h,b' header");
    return PrincipalCurve::tabulated(std::move(samples));
}

namespace detail {

inline double json_number(const nlohmann::json& j, const char* what) {
    if (!j.is_number()) fail(errc::ConfigParseError, std::string(what) + " must be a number");
    return j.get<double>();
}

inline PrincipalCurve parse_axis(const nlohmann::json& j, const std::filesystem::path& base,
                                 const char* name) {
    if (!j.is_object()) fail(errc::ConfigParseError, std::string(name) + " must be an object");
    if (j.contains("linear")) return PrincipalCurve::linear(json_number(j["linear"], name));
    if (j.contains("csv")) {
        if (!j["csv"].is_string())
            fail(errc::ConfigParseError, std::string(name) + ".csv must be a path string");
        std::filesystem::path p = j["csv"].get<std::string>();
        if (p.is_relative()) p = base / p;  // csv paths resolve against the model file
        return load_curve_csv(p);
    }
    fail(errc::ConfigParseError, std::string(name) + " needs either 'linear' or 'csv'");
}

}  // namespace detail

namespace detail {

inline ModelAny parse_model_body(const nlohmann::json& j, const std::filesystem::path& file,
                                 Frame frame) {
    if (j.contains("closed_form")) {
        const auto& cf = j["closed_form"];
        if (!cf.is_object() || !cf.contains("pnorm"))
            fail(errc::ConfigParseError, "'closed_form' supports only {\"pnorm\": {...}}");
        const auto& pn = cf["pnorm"];
        return PNormModel::make(frame, detail::json_number(pn.at("c1"), "pnorm.c1"),
                                detail::json_number(pn.at("c2"), "pnorm.c2"),
                                detail::json_number(pn.at("exponent"), "pnorm.exponent"));
    }

    for (const char* key : {"axis1", "axis2", "exponent"})
        if (!j.contains(key))
            fail(errc::ConfigParseError, std::string("missing '") + key + "'");
    const auto base = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    PrincipalCurve a1 = detail::parse_axis(j["axis1"], base, "axis1");
    PrincipalCurve a2 = detail::parse_axis(j["axis2"], base, "axis2");

    ExponentRule rule = ExponentRule::constant(2.0);
    const auto& je = j["exponent"];
    if (je.is_object() && je.contains("constant")) {
        rule = ExponentRule::constant(detail::json_number(je["constant"], "exponent.constant"));
    } else if (je.is_object() && je.contains("table")) {
        if (!je["table"].is_array())
            fail(errc::ConfigParseError, "exponent.table must be [[level, exponent], ...]");
        std::vector<std::pair<double, double>> rows;
        for (const auto& row : je["table"]) {
            if (!row.is_array() || row.size() != 2)
                fail(errc::ConfigParseError, "exponent.table rows must be [level, exponent]");
            rows.emplace_back(detail::json_number(row[0], "table level"),
                              detail::json_number(row[1], "table exponent"));
        }
        try {
            rule = ExponentRule::table(std::move(rows));
        } catch (const Error& e) {
            fail(errc::ConfigParseError, e.what());
        }
    } else {
        fail(errc::ConfigParseError, "'exponent' needs 'constant' or 'table'");
    }

    SolverOptions opts;
    if (j.contains("solver")) {
        const auto& js = j["solver"];
        if (!js.is_object()) fail(errc::ConfigParseError, "'solver' must be an object");
        if (js.contains("abs_tol")) opts.abs_tol = detail::json_number(js["abs_tol"], "abs_tol");
        if (js.contains("rel_tol")) opts.rel_tol = detail::json_number(js["rel_tol"], "rel_tol");
        if (js.contains("max_iter"))
            opts.max_iter = static_cast<int>(detail::json_number(js["max_iter"], "max_iter"));
    }
    return make_implicit_model(frame, std::move(a1), std::move(a2), std::move(rule), opts);
}

}  // namespace detail

inline LoadedModel load_model(const std::filesystem::path& file) {
    const std::string bytes = read_file(file);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const std::exception& e) {
        fail(errc::ConfigParseError, file.string() + ": " + e.what());
    }
    if (!j.is_object()) fail(errc::ConfigParseError, "model config must be a JSON object");
    if (!j.contains("frame") || !j["frame"].is_string())
        fail(errc::ConfigParseError, "missing 'frame': \"coenergy\" or \"energy\"");
    const std::string fr = j["frame"].get<std::string>();
    if (fr != "coenergy" && fr != "energy")
        fail(errc::ConfigParseError, "'frame' must be \"coenergy\" or \"energy\"");
    const Frame frame = fr == "coenergy" ? Frame::Coenergy : Frame::Energy;
    return LoadedModel{detail::parse_model_body(j, file, frame), detail::fnv1a64(bytes), frame};
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

// `# maganiso <subcommand> <model-hash>` provenance line, then theta,x1,x2 rows
inline void write_polyline_csv(std::ostream& os, const Polyline& poly,
                               const std::string& subcommand, std::uint64_t model_hash) {
    os << "# maganiso " << subcommand << " " << hash_hex(model_hash) << "\n";
    os << "theta,x1,x2\n";
    for (std::size_t i = 0; i < poly.points.size(); ++i)
        os << detail::format_double(poly.angles[i]) << ","
           << detail::format_double(poly.points[i].x1) << ","
           << detail::format_double(poly.points[i].x2) << "\n";
}

}  // namespace maganiso
