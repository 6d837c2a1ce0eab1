#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "principal_curves.hpp"

namespace maganiso {

// Exponent n(w*) (coenergy) or p(w) (energy): constant, or a piecewise-linear table over
// the level, clamped outside its range. The slope is taken from the containing segment
// (right-continuous at knots) and is zero wherever the table is clamped.
class ExponentRule {
public:
    static ExponentRule constant(double e) {
        if (!(e > 0.0)) fail(errc::ExponentTooSmall, "constant exponent must be > 0");
        ExponentRule r;
        r.const_ = e;
        return r;
    }

    static ExponentRule table(std::vector<std::pair<double, double>> rows) {
        if (rows.size() < 2) fail(errc::TooFewSamples, "exponent table needs >= 2 rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!(rows[i].second > 0.0)) fail(errc::ExponentTooSmall, "table exponent must be > 0");
            if (i > 0 && !(rows[i].first > rows[i - 1].first))
                fail(errc::NonMonotoneData, "table levels must be strictly increasing");
        }
        ExponentRule r;
        r.rows_ = std::move(rows);
        return r;
    }

    bool is_constant() const { return rows_.empty(); }

    double operator()(double w) const {
        if (is_constant()) return const_;
        if (w <= rows_.front().first) return rows_.front().second;
        if (w >= rows_.back().first) return rows_.back().second;
        const std::size_t k = segment(w);
        const auto& [w0, e0] = rows_[k];
        const auto& [w1, e1] = rows_[k + 1];
        return e0 + (w - w0) / (w1 - w0) * (e1 - e0);
    }

    double slope(double w) const {
        if (is_constant() || w < rows_.front().first || w >= rows_.back().first) return 0.0;
        const std::size_t k = segment(w);
        return (rows_[k + 1].second - rows_[k].second) / (rows_[k + 1].first - rows_[k].first);
    }

    double min_exponent() const {
        if (is_constant()) return const_;
        double m = rows_.front().second;
        for (const auto& [w, e] : rows_) m = std::min(m, e);
        return m;
    }

    double level_lo() const { return is_constant() ? 0.0 : rows_.front().first; }
    double level_hi() const { return is_constant() ? 0.0 : rows_.back().first; }
    const std::vector<std::pair<double, double>>& rows() const { return rows_; }

private:
    double const_ = 0.0;
    std::vector<std::pair<double, double>> rows_;

    std::size_t segment(double w) const {
        std::size_t k = 0;
        while (k + 2 < rows_.size() && w >= rows_[k + 1].first) ++k;
        return k;
    }
};

struct SolverOptions {
    double abs_tol = 1e-14;  // on the level, J/m³
    double rel_tol = 1e-12;  // residual certificate
    int max_iter = 200;
};

// The implicit interpolation model: Σᵢ (|xᵢ|/x̂ᵢ(w))^{e(w)} = 1 defines w(x₁,x₂),
// where x̂ᵢ = ĥᵢ in the coenergy frame and b̂ᵢ in the energy frame.
struct ImplicitModel {
    Frame frame = Frame::Coenergy;
    AxisProfile axis1;
    AxisProfile axis2;
    ExponentRule exponent;
    SolverOptions solver;
    bool nonmonotone_residual = false;  // set by the configuration-time uniqueness probe

    const AxisProfile& axis(int i) const { return i == 0 ? axis1 : axis2; }
};

struct UniquenessReport {
    bool monotone = true;
    int sign_changes = 0;
    std::vector<double> sample_levels;  // left sample of each detected sign change
};

struct LevelSolution {
    double level = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// One term (|x|/x̂)^e, evaluated as exp(e·(ln|x| − ln x̂)) so that extreme ratios do not
// overflow the intermediate quotient; log-arguments past 700 exit early to +inf, which
// the bracketing solver treats as a positive residual.
inline double pow_ratio(double lt, double k) {
    const double z = k * lt;
    if (z > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(z);
}

inline double level_term(double xabs, double xhat, double e) {
    if (xabs == 0.0) return 0.0;
    return pow_ratio(std::log(xabs) - std::log(xhat), e);
}

}  // namespace detail

inline double residual(const ImplicitModel& m, Vec2 point, double level) {
    if (!(level > 0.0)) fail(errc::NonPositiveLevel, "residual needs level > 0");
    const double e = m.exponent(level);
    return detail::level_term(std::abs(point.x1), m.axis1.inverse(level), e) +
           detail::level_term(std::abs(point.x2), m.axis2.inverse(level), e) - 1.0;
}

namespace detail {

// residual and its level-derivative sharing the inverse evaluations
struct ResidualEval {
    double F;
    double dF;  // ∂F/∂w = Σⱼ tⱼ^e (e'·ln tⱼ − e·x̂ⱼ'/x̂ⱼ)
};

inline ResidualEval residual_full(const ImplicitModel& m, double a1, double a2, double w) {
    const double e = m.exponent(w);
    const double ep = m.exponent.slope(w);
    double F = -1.0, dF = 0.0;
    const double as[2] = {a1, a2};
    for (int i = 0; i < 2; ++i) {
        if (as[i] == 0.0) continue;
        const auto inv = m.axis(i).inverse_full(w);
        const double lt = std::log(as[i]) - std::log(inv.x);
        const double T = pow_ratio(lt, e);
        F += T;
        if (std::isfinite(T)) dF += T * (ep * lt - e * inv.d1 / inv.x);
    }
    return {F, dF};
}

}  // namespace detail

inline LevelSolution solve_level_detailed(const ImplicitModel& m, Vec2 point) {
    LevelSolution out;
    if (!point.finite()) fail(errc::UsageError, "point must be finite");
    if (m.nonmonotone_residual) out.warnings.push_back("NonMonotoneResidual");
    if (point.is_zero()) return out;  // continuous extension w(0,0) = 0

    const double a1 = std::abs(point.x1), a2 = std::abs(point.x2);
    // On an axis the level equation collapses to x̂ᵢ(w) = |xᵢ|, whose root is the axis
    // (co)energy itself — return it exactly.
    if (a2 == 0.0) { out.level = m.axis1.value(a1); return out; }
    if (a1 == 0.0) { out.level = m.axis2.value(a2); return out; }

    const double v1 = m.axis1.value(a1), v2 = m.axis2.value(a2);
    double lo = std::max(v1, v2);
    auto F = [&](double w) { return detail::residual_full(m, a1, a2, w); };

    auto flo = F(lo);
    // each term is ≤ 1 at the root, so F(lo) ≥ 0 up to inversion round-off
    if (std::abs(flo.F) <= 1e-13) { out.level = lo; out.residual = flo.F; return out; }
    int guard = 0;
    while (flo.F < 0.0 && guard++ < 8) {  // defensive: shave round-off from the bound
        lo = std::nextafter(lo * (1.0 - 1e-12), 0.0);
        flo = F(lo);
    }

    // first trial upper bound: the single-axis sum (valid for e ≥ 2), then doubling
    double hi = v1 + v2;
    if (!(hi > lo)) hi = lo * 2.0 + 1e-300;
    auto fhi = F(hi);
    double step = std::max(hi - lo, 1e-6 * std::max(1.0, lo));
    int doublings = 0;
    while (fhi.F > 0.0) {
        if (++doublings > 2000 || !std::isfinite(hi))
            fail(errc::NoBracket, "residual never changes sign above the lower bound");
        hi += step;
        step *= 2.0;
        fhi = F(hi);
    }

    detail::RootTolerances tol;
    tol.f_tol = 1e-15;
    tol.x_abs = m.solver.abs_tol;
    tol.x_rel = 4e-16;
    tol.max_iter = m.solver.max_iter;
    auto res = detail::newton_bisection([&](double w) { return F(w).F; },
                                        [&](double w) { return F(w).dF; }, lo, hi, flo.F, fhi.F,
                                        tol);
    out.level = res.x;
    out.residual = res.fx;
    out.iterations = res.iterations;
    if (!res.converged || std::abs(res.fx) > m.solver.rel_tol)
        fail(errc::MaxIterExceeded, "level solver did not certify |F| <= rel_tol");
    return out;
}

inline double solve_level(const ImplicitModel& m, Vec2 point) {
    return solve_level_detailed(m, point).level;
}

inline UniquenessReport check_uniqueness(const ImplicitModel& m, Vec2 point, double level_lo,
                                         double level_hi, int samples = 512) {
    if (!(level_lo > 0.0) || !(level_hi > level_lo))
        fail(errc::NonPositiveLevel, "level range must be positive and ordered");
    UniquenessReport rep;
    const double a1 = std::abs(point.x1), a2 = std::abs(point.x2);
    const double lr = std::log(level_lo), dr = std::log(level_hi) - lr;
    double prev = 0.0, prev_w = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double w = std::exp(lr + dr * i / (samples - 1));
        const double f = detail::residual_full(m, a1, a2, w).F;
        if (i > 0) {
            if (f > prev + 1e-14 * std::max(1.0, std::abs(prev))) rep.monotone = false;
            if ((f > 0.0) != (prev > 0.0)) {
                ++rep.sign_changes;
                rep.sample_levels.push_back(prev_w);
            }
        }
        prev = f;
        prev_w = w;
    }
    return rep;
}

// Builds a model; variable-exponent rules are probed once for residual monotonicity
// (solve_level carries a NonMonotoneResidual warning afterwards when the probe hit).
// The probe region is derived from the table's level span: 8 directions through the
// circle of the mid-level inverse radii, scanning [lo/4, 4·hi].
inline ImplicitModel make_implicit_model(Frame frame, PrincipalCurve curve1, PrincipalCurve curve2,
                                         ExponentRule exponent, SolverOptions solver = {}) {
    ImplicitModel m{frame,
                    AxisProfile(std::move(curve1), frame),
                    AxisProfile(std::move(curve2), frame),
                    std::move(exponent),
                    solver,
                    false};
    if (!m.exponent.is_constant()) {
        const double wl = std::max(m.exponent.level_lo(), 1e-12) / 4.0;
        const double wh = m.exponent.level_hi() * 4.0;
        const double wm = 0.5 * (m.exponent.level_lo() + m.exponent.level_hi());
        const double r1 = m.axis1.inverse(wm), r2 = m.axis2.inverse(wm);
        for (int k = 0; k < 8 && !m.nonmonotone_residual; ++k) {
            const double ang = (k + 0.5) * 3.14159265358979323846 / 16.0;
            const Vec2 p{r1 * std::cos(ang), r2 * std::sin(ang)};
            const auto rep = check_uniqueness(m, p, wl, wh);
            if (!rep.monotone || rep.sign_changes > 1) m.nonmonotone_residual = true;
        }
    }
    return m;
}

}  // namespace maganiso
