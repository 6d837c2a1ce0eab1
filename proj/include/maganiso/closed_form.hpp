#pragma once

#include "core.hpp"
#include "principal_curves.hpp"

namespace maganiso {

// Explicit p-norm model: w* = ½‖(x₁/c₁, x₂/c₂)‖ₑ² (coenergy) or w = ½‖(c₁x₁, c₂x₂)‖ₑ²
// (energy). Serves as the oracle for the implicit solver with linear axes.
struct PNormModel {
    Frame frame = Frame::Coenergy;
    double c1 = 1.0;
    double c2 = 1.0;
    double exponent = 2.0;

    static PNormModel make(Frame frame, double c1, double c2, double exponent) {
        if (!(c1 > 0.0) || !(c2 > 0.0))
            fail(errc::NonPositiveCoefficient, "p-norm scales must be positive");
        if (!(exponent >= 1.0)) fail(errc::ExponentTooSmall, "p-norm exponent must be >= 1");
        return {frame, c1, c2, exponent};
    }

    double scale1() const { return frame == Frame::Coenergy ? 1.0 / c1 : c1; }
    double scale2() const { return frame == Frame::Coenergy ? 1.0 / c2 : c2; }
};

inline double conjugate_exponent(double e) {
    if (!(e > 1.0)) fail(errc::ExponentNotConjugable, "conjugate exponent needs e > 1");
    return e / (e - 1.0);
}

inline PNormModel conjugate(const PNormModel& m) {
    return PNormModel::make(m.frame == Frame::Coenergy ? Frame::Energy : Frame::Coenergy, m.c1,
                            m.c2, conjugate_exponent(m.exponent));
}

namespace detail {

// ‖v‖ₑ with the largest component factored out, so |v| up to ~1e300 stays finite
inline double stable_pnorm(double v1, double v2, double e) {
    const double a1 = std::abs(v1), a2 = std::abs(v2);
    const double m = std::max(a1, a2);
    if (m == 0.0) return 0.0;
    return m * std::pow(std::pow(a1 / m, e) + std::pow(a2 / m, e), 1.0 / e);
}

}  // namespace detail

inline double pnorm_value(const PNormModel& m, Vec2 p) {
    const double r = detail::stable_pnorm(m.scale1() * p.x1, m.scale2() * p.x2, m.exponent);
    return 0.5 * r * r;
}

inline Vec2 pnorm_gradient(const PNormModel& m, Vec2 p) {
    const double e = m.exponent;
    if (p.is_zero()) {
        if (e == 1.0)
            fail(errc::DegenerateDiscriminant, "gradient of the 1-norm model at the origin");
        return {};
    }
    const double a1 = m.scale1(), a2 = m.scale2();
    const double v1 = a1 * p.x1, v2 = a2 * p.x2;
    const double r = detail::stable_pnorm(v1, v2, e);
    const double t1 = std::abs(v1) / r, t2 = std::abs(v2) / r;
    return {a1 * r * std::pow(t1, e - 1.0) * detail::sgn(v1),
            a2 * r * std::pow(t2, e - 1.0) * detail::sgn(v2)};
}

inline SymTensor2 pnorm_hessian(const PNormModel& m, Vec2 p) {
    const double e = m.exponent;
    const double a1 = m.scale1(), a2 = m.scale2();
    if (e == 2.0) return {a1 * a1, 0.0, a2 * a2};  // constant quadratic Hessian
    if (p.is_zero()) fail(errc::OriginSingularity, "p-norm Hessian is direction-dependent at 0");
    if (e < 2.0 && std::min(std::abs(p.x1), std::abs(p.x2)) <= 1e-12 * p.norm_inf())
        fail(errc::AxisSingularity, "p-norm Hessian blows up on an axis for exponent < 2");
    const double v1 = a1 * p.x1, v2 = a2 * p.x2;
    const double r = detail::stable_pnorm(v1, v2, e);
    const double t1 = std::abs(v1) / r, t2 = std::abs(v2) / r;
    const double s1 = detail::sgn(v1), s2 = detail::sgn(v2);
    const double q1 = std::pow(t1, e - 1.0), q2 = std::pow(t2, e - 1.0);
    SymTensor2 H;
    H.t11 = a1 * a1 * ((2.0 - e) * q1 * q1 + (e - 1.0) * (t1 == 0.0 ? 0.0 : std::pow(t1, e - 2.0)));
    H.t22 = a2 * a2 * ((2.0 - e) * q2 * q2 + (e - 1.0) * (t2 == 0.0 ? 0.0 : std::pow(t2, e - 2.0)));
    H.t12 = a1 * a2 * (2.0 - e) * q1 * q2 * s1 * s2;
    return H;
}

// generic model interface (shared with the implicit model by the analysis tools)
inline double value(const PNormModel& m, Vec2 p) { return pnorm_value(m, p); }
inline Vec2 gradient(const PNormModel& m, Vec2 p) { return pnorm_gradient(m, p); }
inline SymTensor2 hessian(const PNormModel& m, Vec2 p) { return pnorm_hessian(m, p); }

// Explicit special-case model for proportional axis maps x̂₁ = λ·x̂₂: with
// ψ(w) = x̂₂(w)ⁿ the level equation collapses to ψ(w) = (|x₁|/λ)ⁿ + |x₂|ⁿ.
// (Substituting x̂₁ = λx̂₂ into Σ(|xᵢ|/x̂ᵢ)ⁿ = 1 divides the x₁ term by λⁿ.)
class SpecialModel {
public:
    SpecialModel(AxisProfile axis1, AxisProfile axis2, double n)
        : axis2_(std::move(axis2)), n_(n) {
        if (!(n >= 1.0)) fail(errc::ExponentTooSmall, "special model requires n >= 1");
        lambda_ = axis1.inverse(1.0) / axis2_.inverse(1.0);
        if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
            fail(errc::ProportionalityViolated, "axis ratio at the reference level is degenerate");
        for (int i = 0; i < 32; ++i) {  // proportionality must hold across the range, not at one w
            const double w = std::pow(10.0, -3.0 + 6.0 * i / 31.0);
            const double x1 = axis1.inverse(w), x2 = axis2_.inverse(w);
            if (std::abs(x1 - lambda_ * x2) > 1e-8 * std::abs(x1))
                fail(errc::ProportionalityViolated,
                     "x̂₁ = λ·x̂₂ fails beyond 1e-8 at level " + detail::format_double(w));
        }
    }

    double lambda() const { return lambda_; }
    double n() const { return n_; }

    // ψ⁻¹(arg) where arg = (|x₁|/λ)ⁿ + |x₂|ⁿ. Since ψ = x̂₂ⁿ and the axis (co)energy is
    // the exact inverse of x̂₂, ψ⁻¹(arg) = value₂(arg^{1/n}) — evaluated through the
    // stable factored norm instead of a nested root solve.
    double value(Vec2 p) const {
        if (p.is_zero()) return 0.0;
        const double r = detail::stable_pnorm(std::abs(p.x1) / lambda_, std::abs(p.x2), n_);
        return axis2_.value(r);
    }

private:
    AxisProfile axis2_;
    double lambda_ = 1.0;
    double n_ = 2.0;
};

inline double special_value(const SpecialModel& m, Vec2 p) { return m.value(p); }

}  // namespace maganiso
