#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "implicit_model.hpp"

namespace maganiso {

struct LawEvaluation {
    double level = 0.0;
    Vec2 gradient;
    std::optional<SymTensor2> hessian;
    double discriminant = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline bool near_axis(Vec2 p) {
    const double amin = std::min(std::abs(p.x1), std::abs(p.x2));
    return amin <= 1e-12 * p.norm_inf();
}

// Everything the first and second implicit derivatives need at the solved level.
struct LawParts {
    double e, ep;
    double a[2], s[2];       // |x_i|, sign(x_i)
    double xh[2];            // x̂_i(w)
    double t[2], T[2], L[2]; // t_i, t_i^e, ln t_i (zero coordinate: t=T=0, L unused)
    double g[2], k[2];       // x̂'/x̂, x̂''/x̂
    double N[2];             // ∂F/∂x_i
    double D;                // -∂F/∂w
};

inline LawParts law_parts(const ImplicitModel& m, Vec2 p, double w) {
    LawParts q{};
    q.e = m.exponent(w);
    q.ep = m.exponent.slope(w);
    q.a[0] = std::abs(p.x1);
    q.a[1] = std::abs(p.x2);
    q.s[0] = sgn(p.x1);
    q.s[1] = sgn(p.x2);
    q.D = 0.0;
    for (int i = 0; i < 2; ++i) {
        const auto inv = m.axis(i).inverse_full(w);
        q.xh[i] = inv.x;
        q.g[i] = inv.d1 / inv.x;
        q.k[i] = inv.d2 / inv.x;
        if (q.a[i] == 0.0) continue;
        q.t[i] = q.a[i] / inv.x;
        q.L[i] = std::log(q.a[i]) - std::log(inv.x);
        q.T[i] = detail::pow_ratio(q.L[i], q.e);
        q.N[i] = q.e * detail::pow_ratio(q.L[i], q.e - 1.0) * q.s[i] / inv.x;
        q.D += q.T[i] * (q.e * q.g[i] - q.ep * q.L[i]);
    }
    return q;
}

// symmetric pair of off-diagonal entries, kept separate so tests can assert symmetry
struct HessRaw {
    double h11, h12, h21, h22;
};

inline HessRaw hessian_from_parts(const LawParts& q) {
    const double D = q.D;
    double G[2], dNdw[2], dDdx[2];
    double dDdw = 0.0;
    for (int j = 0; j < 2; ++j) {
        if (q.a[j] == 0.0) {
            G[j] = dNdw[j] = dDdx[j] = 0.0;
            continue;
        }
        G[j] = q.N[j] / D;
        const double eg = q.e * q.g[j] - q.ep * q.L[j];
        dNdw[j] = q.N[j] * (q.ep / q.e + q.ep * q.L[j] - q.e * q.g[j]);
        dDdx[j] = q.N[j] * (eg - q.ep / q.e);
        dDdw += q.T[j] * (-eg * eg + 2.0 * q.ep * q.g[j] + q.e * q.k[j] - q.e * q.g[j] * q.g[j]);
    }
    HessRaw H{};
    double* out[2][2] = {{&H.h11, &H.h12}, {&H.h21, &H.h22}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double dNdx = 0.0;
            if (i == j) {
                if (q.a[i] > 0.0)
                    dNdx = q.e * (q.e - 1.0) * pow_ratio(q.L[i], q.e - 2.0) /
                           (q.xh[i] * q.xh[i]);
                else if (q.e == 2.0)
                    dNdx = 2.0 / (q.xh[i] * q.xh[i]);
                // a_i = 0, e > 2: t^{e-2} → 0
            }
            *out[i][j] = ((dNdx + dNdw[i] * G[j]) * D - q.N[i] * (dDdx[j] + dDdw * G[j])) / (D * D);
        }
    return H;
}

}  // namespace detail

inline LawEvaluation law_evaluation(const ImplicitModel& m, Vec2 point, bool with_hessian) {
    LawEvaluation ev;
    if (!m.exponent.is_constant()) ev.warnings.push_back("VariableExponentDerivative");

    if (point.is_zero()) {
        if (with_hessian) fail(errc::OriginSingularity, "second derivatives undefined at (0,0)");
        const double e0 = m.exponent(0.0);
        if (e0 < 1.0) fail(errc::ExponentTooSmall, "gradient requires exponent >= 1");
        if (e0 == 1.0)
            fail(errc::DegenerateDiscriminant, "discriminant vanishes at the origin for e = 1");
        return ev;  // gradient (0,0) at the minimum
    }

    auto sol = solve_level_detailed(m, point);
    ev.level = sol.level;
    for (auto& w : sol.warnings) ev.warnings.push_back(std::move(w));

    const auto q = detail::law_parts(m, point, ev.level);
    if (q.e < 1.0) fail(errc::ExponentTooSmall, "derivatives require exponent >= 1 at the level");
    if (!(q.D > 0.0) || !std::isfinite(q.D))
        fail(errc::DegenerateDiscriminant, "discriminant not positive/finite");
    ev.discriminant = q.D;
    ev.gradient = {q.a[0] == 0.0 ? 0.0 : q.N[0] / q.D, q.a[1] == 0.0 ? 0.0 : q.N[1] / q.D};

    if (with_hessian) {
        if (q.e < 2.0 && detail::near_axis(point))
            fail(errc::AxisSingularity,
                 "second derivatives blow up on a principal axis for exponent < 2");
        const auto H = detail::hessian_from_parts(q);
        ev.hessian = SymTensor2{H.h11, 0.5 * (H.h12 + H.h21), H.h22};
    }
    return ev;
}

inline Vec2 gradient(const ImplicitModel& m, Vec2 point) {
    return law_evaluation(m, point, false).gradient;
}

inline SymTensor2 hessian(const ImplicitModel& m, Vec2 point) {
    return *law_evaluation(m, point, true).hessian;
}

// level value as a plain function (generic model interface used by analysis)
inline double value(const ImplicitModel& m, Vec2 point) { return solve_level(m, point); }

struct TensorPair {
    SymTensor2 permeability;  // μ' = ∇²w*(h)
    SymTensor2 reluctivity;   // ν' = ∇²w(b) at b = ∇w*(h)
    double product_error = 0.0;
};

template <class ModelCo, class ModelEn>
TensorPair differential_tensor_pair(const ModelCo& model_co, const ModelEn& model_en, Vec2 h) {
    TensorPair tp;
    tp.permeability = hessian(model_co, h);
    const Vec2 b = gradient(model_co, h);
    tp.reluctivity = hessian(model_en, b);
    tp.product_error = SymTensor2::product_error(tp.permeability, tp.reluctivity);
    return tp;
}

}  // namespace maganiso
