#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace maganiso {

enum class Frame { Coenergy, Energy };

inline constexpr const char* frame_name(Frame f) {
    return f == Frame::Coenergy ? "coenergy" : "energy";
}

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x1, -a.x2}; }
    double operator[](int i) const { return i == 0 ? x1 : x2; }

    double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
    double norm() const { return std::hypot(x1, x2); }
    double norm_inf() const { return std::max(std::abs(x1), std::abs(x2)); }
    bool is_zero() const { return x1 == 0.0 && x2 == 0.0; }
    bool finite() const { return std::isfinite(x1) && std::isfinite(x2); }
};

// Symmetric 2x2 tensor (differential permeability/reluctivity).
struct SymTensor2 {
    double t11 = 0.0;
    double t12 = 0.0;
    double t22 = 0.0;

    double trace() const { return t11 + t22; }
    double det() const { return t11 * t22 - t12 * t12; }
    double eig_min() const {
        const double m = 0.5 * trace();
        const double d = std::sqrt(std::max(m * m - det(), 0.0));
        return m - d;
    }
    double eig_max() const {
        const double m = 0.5 * trace();
        const double d = std::sqrt(std::max(m * m - det(), 0.0));
        return m + d;
    }
    Vec2 apply(Vec2 v) const { return {t11 * v.x1 + t12 * v.x2, t12 * v.x1 + t22 * v.x2}; }

    // max-norm distance of the product a*b from the identity
    static double product_error(const SymTensor2& a, const SymTensor2& b) {
        const double p11 = a.t11 * b.t11 + a.t12 * b.t12;
        const double p12 = a.t11 * b.t12 + a.t12 * b.t22;
        const double p21 = a.t12 * b.t11 + a.t22 * b.t12;
        const double p22 = a.t12 * b.t12 + a.t22 * b.t22;
        return std::max(std::max(std::abs(p11 - 1.0), std::abs(p22 - 1.0)),
                        std::max(std::abs(p12), std::abs(p21)));
    }
};

enum class errc {
    NonPositiveCoefficient,
    NonMonotoneData,
    MissingOrigin,
    TooFewSamples,
    NegativeEnergy,
    NonPositiveLevel,
    NoBracket,
    MaxIterExceeded,
    ExponentTooSmall,
    DegenerateDiscriminant,
    AxisSingularity,
    OriginSingularity,
    ExponentNotConjugable,
    ProportionalityViolated,
    ArgmaxOnBoundary,
    NewtonDiverged,
    UsageError,
    ConfigParseError,
};

inline constexpr const char* errc_name(errc c) {
    switch (c) {
        case errc::NonPositiveCoefficient: return "NonPositiveCoefficient";
        case errc::NonMonotoneData: return "NonMonotoneData";
        case errc::MissingOrigin: return "MissingOrigin";
        case errc::TooFewSamples: return "TooFewSamples";
        case errc::NegativeEnergy: return "NegativeEnergy";
        case errc::NonPositiveLevel: return "NonPositiveLevel";
        case errc::NoBracket: return "NoBracket";
        case errc::MaxIterExceeded: return "MaxIterExceeded";
        case errc::ExponentTooSmall: return "ExponentTooSmall";
        case errc::DegenerateDiscriminant: return "DegenerateDiscriminant";
        case errc::AxisSingularity: return "AxisSingularity";
        case errc::OriginSingularity: return "OriginSingularity";
        case errc::ExponentNotConjugable: return "ExponentNotConjugable";
        case errc::ProportionalityViolated: return "ProportionalityViolated";
        case errc::ArgmaxOnBoundary: return "ArgmaxOnBoundary";
        case errc::NewtonDiverged: return "NewtonDiverged";
        case errc::UsageError: return "UsageError";
        case errc::ConfigParseError: return "ConfigParseError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

namespace detail {

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RootTolerances {
    double f_tol = 1e-15;       // accept when |f| falls below this
    double x_abs = 1e-14;       // bracket width, absolute
    double x_rel = 4e-16;       // bracket width, relative
    int max_iter = 200;
};

// Safeguarded Newton on a bracketed root: f(lo) and f(hi) have opposite signs.
// Newton steps that leave the bracket (or fail to shrink it) fall back to bisection,
// so the bracket width decreases and termination is guaranteed.
template <class F, class DF>
RootResult newton_bisection(F&& f, DF&& df, double lo, double hi, double flo, double fhi,
                            RootTolerances tol = {}) {
    RootResult res;
    if ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0)
        fail(errc::NoBracket, "root bracket endpoints have the same sign");

    // The smallest residual ever observed certifies the root; the root may sit on a
    // bracket endpoint, where pure bisection would stall one width away from it.
    double best_x = std::abs(flo) <= std::abs(fhi) ? lo : hi;
    double best_f = std::abs(flo) <= std::abs(fhi) ? flo : fhi;
    auto finish = [&](bool ok) {
        res.x = best_x;
        res.fx = best_f;
        res.converged = ok || std::abs(best_f) <= 1e-12;
        return res;
    };
    if (std::abs(best_f) <= tol.f_tol) return finish(true);

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    res.iterations = 1;
    for (; res.iterations <= tol.max_iter; ++res.iterations) {
        if (std::abs(fx) < std::abs(best_f)) { best_x = x; best_f = fx; }
        if (std::abs(fx) <= tol.f_tol) return finish(true);
        if ((fx > 0.0) == (flo > 0.0)) { lo = x; flo = fx; } else { hi = x; fhi = fx; }
        const double width = hi - lo;
        const double ulp_floor = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x) + 5e-324;
        if (width <= ulp_floor) return finish(true);  // nothing left to resolve
        // honour the caller's width tolerance only once the residual certifies, so an
        // absolute tolerance coarser than the root scale cannot truncate the refinement
        if (width <= tol.x_abs + tol.x_rel * std::abs(x) && std::abs(best_f) <= 1e-12)
            return finish(true);
        const double d = df(x);
        double xn = x - fx / d;
        if (!(d != 0.0) || !(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
        fx = f(x);
    }
    return finish(false);
}

// Shortest round-trip decimal form; integral values keep a trailing ".0" so that
// printed levels read as reals (e.g. "1.0", "0.0").
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, p);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline unsigned hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("MAGANISO_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<unsigned>(std::min<long>(v, 256));
    }
    return n;
}

// Static block partition: thread t handles [begin_t, end_t). Results must be written to
// per-index slots by the body, which keeps output independent of the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned nt = std::min<std::size_t>(hardware_threads(), n ? n : 1);
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::exception_ptr first_error;
    std::mutex guard;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t b = n * t / nt;
        const std::size_t e = n * (t + 1) / nt;
        pool.emplace_back([&, b, e] {
            try {
                for (std::size_t i = b; i < e; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(guard);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail
}  // namespace maganiso
