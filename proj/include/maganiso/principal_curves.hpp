#pragma once

#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "core.hpp"

namespace maganiso {

// Scalar monotone B-H law along one principal axis.
//
// Linear(c) is b(h) = h/c², so the inverse-coenergy map comes out as ĥ(w) = c·√(2w).
// Tabulated curves use a Fritsch–Carlson monotone cubic Hermite interpolant through the
// measured samples (harmonic-mean interior slopes, secant end slopes), extended by odd
// reflection for h < 0 and linearly with the terminal slope beyond the last sample.
// The integrals ∫b ds and ∫s·b'(s) ds are exact per segment (piecewise polynomials).
class PrincipalCurve {
public:
    static PrincipalCurve linear(double c) {
        if (!(c > 0.0)) fail(errc::NonPositiveCoefficient, "linear curve needs c > 0");
        PrincipalCurve pc;
        pc.c_ = c;
        return pc;
    }

    static PrincipalCurve tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 3) fail(errc::TooFewSamples, "need at least 3 (h,b) samples");
        if (samples.front().first != 0.0 || samples.front().second != 0.0)
            fail(errc::MissingOrigin, "first sample must be (0,0)");
        PrincipalCurve pc;
        const std::size_t n = samples.size();
        pc.h_.resize(n);
        pc.b_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pc.h_[i] = samples[i].first;
            pc.b_[i] = samples[i].second;
            if (i > 0) {
                if (!(pc.h_[i] > pc.h_[i - 1]))
                    fail(errc::NonMonotoneData, "h samples must be strictly increasing");
                if (!((pc.b_[i] - pc.b_[i - 1]) / (pc.h_[i] - pc.h_[i - 1]) > 0.0))
                    fail(errc::NonMonotoneData, "a secant slope is not positive");
            }
        }
        pc.build();
        return pc;
    }

    bool is_linear() const { return h_.empty(); }
    double linear_coefficient() const { return c_; }
    double h_max() const {
        return is_linear() ? std::numeric_limits<double>::infinity() : h_.back();
    }

    // b(h), odd in h
    double b(double h) const {
        if (is_linear()) return h / (c_ * c_);
        const double a = std::abs(h);
        return h < 0.0 ? -eval_abs(a) : eval_abs(a);
    }

    // db/dh, even in h, strictly positive
    double db(double h) const {
        if (is_linear()) return 1.0 / (c_ * c_);
        const double a = std::abs(h);
        if (a >= h_.back()) return d_.back();
        const auto [k, t, dx] = locate(a);
        return (cf_[k].a1 + t * (2.0 * cf_[k].a2 + t * 3.0 * cf_[k].a3)) / dx;
    }

    // ∫_0^x b(s) ds for x ≥ 0 (the axis coenergy)
    double integral_b(double x) const {
        if (is_linear()) return x * x / (2.0 * c_ * c_);
        if (x >= h_.back()) {
            const double u = x - h_.back();
            return wcum_.back() + b_.back() * u + 0.5 * d_.back() * u * u;
        }
        const auto [k, t, dx] = locate(x);
        const auto& c = cf_[k];
        const double seg = dx * t * (c.a0 + t * (c.a1 / 2.0 + t * (c.a2 / 3.0 + t * c.a3 / 4.0)));
        return wcum_[k] + seg;
    }

    // ∫_0^x s·b'(s) ds for x ≥ 0 (the axis energy, expressed over h)
    double integral_s_db(double x) const {
        if (is_linear()) return x * x / (2.0 * c_ * c_);
        if (x >= h_.back()) {
            const double u = x - h_.back();
            return ecum_.back() + 0.5 * d_.back() * u * (2.0 * h_.back() + u);
        }
        const auto [k, t, dx] = locate(x);
        const auto& c = cf_[k];
        const double p1 = t * (c.a1 + t * (c.a2 + t * c.a3));                     // ∫ b' dt · dx
        const double p2 = t * t * (c.a1 / 2.0 + t * (2.0 * c.a2 / 3.0 + t * 3.0 * c.a3 / 4.0));
        return ecum_[k] + h_[k] * p1 + dx * p2;
    }

    // h with b(h) = y, for y ≥ 0
    double invert_b(double y) const {
        if (is_linear()) return y * c_ * c_;
        if (y <= 0.0) return 0.0;
        if (y >= b_.back()) return h_.back() + (y - b_.back()) / d_.back();
        std::size_t k = std::upper_bound(b_.begin(), b_.end(), y) - b_.begin();
        if (k > 0) --k;
        if (k >= cf_.size()) k = cf_.size() - 1;
        const double dx = h_[k + 1] - h_[k];
        const auto& c = cf_[k];
        auto f = [&](double t) { return c.a0 + t * (c.a1 + t * (c.a2 + t * c.a3)) - y; };
        auto df = [&](double t) { return c.a1 + t * (2.0 * c.a2 + t * 3.0 * c.a3); };
        detail::RootTolerances tol;
        tol.f_tol = 1e-16 * y;  // must stay relative: y spans many decades
        tol.x_abs = 0.0;
        const auto r = detail::newton_bisection(f, df, 0.0, 1.0, f(0.0), f(1.0), tol);
        return h_[k] + r.x * dx;
    }

    // h with ∫_0^h b = w (coenergy inversion), w ≥ 0
    double invert_integral_b(double w) const {
        if (is_linear()) return c_ * std::sqrt(2.0 * w);
        if (w <= 0.0) return 0.0;
        if (w >= wcum_.back()) {
            // quadratic continuation: wcum + b_n u + d_n u²/2 = w
            const double bn = b_.back(), dn = d_.back();
            const double u = (std::sqrt(bn * bn + 2.0 * dn * (w - wcum_.back())) - bn) / dn;
            return h_.back() + u;
        }
        return invert_cum(w, wcum_, [this](double h) { return integral_b(h); },
                          [this](double h) { return b(h); });
    }

    // h with ∫_0^h s·b'(s) ds = w (energy inversion, over h), w ≥ 0
    double invert_integral_s_db(double w) const {
        if (is_linear()) return c_ * std::sqrt(2.0 * w);
        if (w <= 0.0) return 0.0;
        if (w >= ecum_.back()) {
            // d_n (2 h_n u + u²)/2 = w - ecum
            const double hn = h_.back(), dn = d_.back();
            const double u = -hn + std::sqrt(hn * hn + 2.0 * (w - ecum_.back()) / dn);
            return hn + u;
        }
        return invert_cum(w, ecum_, [this](double h) { return integral_s_db(h); },
                          [this](double h) { return h * db(h); });
    }

private:
    struct Coef { double a0, a1, a2, a3; };  // cubic in local t ∈ [0,1]

    double c_ = 0.0;                 // linear coefficient (unused when tabulated)
    std::vector<double> h_, b_, d_;  // nodes and nodal slopes
    std::vector<Coef> cf_;
    std::vector<double> wcum_, ecum_;  // cumulative ∫b and ∫s·b' at the nodes

    void build() {
        const std::size_t n = h_.size();
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (b_[i + 1] - b_[i]) / (h_[i + 1] - h_[i]);
        d_.assign(n, 0.0);
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            // weighted harmonic mean keeps the interpolant monotone (Fritsch–Carlson)
            const double dl = h_[i] - h_[i - 1], dr = h_[i + 1] - h_[i];
            const double w1 = 2.0 * dr + dl, w2 = dr + 2.0 * dl;
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        cf_.resize(n - 1);
        wcum_.assign(n, 0.0);
        ecum_.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double dx = h_[k + 1] - h_[k];
            const double e = b_[k + 1] - b_[k];
            cf_[k] = {b_[k], dx * d_[k], 3.0 * e - dx * (2.0 * d_[k] + d_[k + 1]),
                      -2.0 * e + dx * (d_[k] + d_[k + 1])};
            const auto& c = cf_[k];
            wcum_[k + 1] = wcum_[k] + dx * (c.a0 + c.a1 / 2.0 + c.a2 / 3.0 + c.a3 / 4.0);
            const double p1 = c.a1 + c.a2 + c.a3;
            const double p2 = c.a1 / 2.0 + 2.0 * c.a2 / 3.0 + 3.0 * c.a3 / 4.0;
            ecum_[k + 1] = ecum_[k] + h_[k] * p1 + dx * p2;
        }
    }

    std::tuple<std::size_t, double, double> locate(double x) const {
        std::size_t k = std::upper_bound(h_.begin(), h_.end(), x) - h_.begin();
        if (k > 0) --k;
        if (k >= cf_.size()) k = cf_.size() - 1;
        const double dx = h_[k + 1] - h_[k];
        return {k, (x - h_[k]) / dx, dx};
    }

    double eval_abs(double x) const {
        if (x >= h_.back()) return b_.back() + d_.back() * (x - h_.back());
        const auto [k, t, dx] = locate(x);
        const auto& c = cf_[k];
        return c.a0 + t * (c.a1 + t * (c.a2 + t * c.a3));
    }

    template <class F, class DF>
    double invert_cum(double w, const std::vector<double>& cum, F&& f, DF&& df) const {
        std::size_t k = std::upper_bound(cum.begin(), cum.end(), w) - cum.begin();
        if (k > 0) --k;
        if (k >= cf_.size()) k = cf_.size() - 1;
        const double lo = h_[k], hi = h_[k + 1];
        auto g = [&](double h) { return f(h) - w; };
        detail::RootTolerances tol;
        tol.f_tol = 1e-16 * w;  // must stay relative: w spans many decades
        tol.x_abs = 0.0;
        const auto r = detail::newton_bisection(g, df, lo, hi, g(lo), g(hi), tol);
        return r.x;
    }
};

// Inverse map x̂(w) with its first two derivatives, evaluated at one level.
struct InverseEval {
    double x = 0.0;   // ĥ(w) in the coenergy frame, b̂(w) in the energy frame
    double d1 = 0.0;  // dx̂/dw
    double d2 = 0.0;  // d²x̂/dw²
};

// Per-axis scalar (co)energy profile in a fixed frame.
// Coenergy: value(h) = ∫_0^|h| b(s) ds, inverse ĥ(w).
// Energy:   value(b) = ∫_0^|b| h(β) dβ = ∫_0^{h(|b|)} s·b'(s) ds, inverse b̂(w).
class AxisProfile {
public:
    AxisProfile(PrincipalCurve curve, Frame frame) : curve_(std::move(curve)), frame_(frame) {}

    Frame frame() const { return frame_; }
    const PrincipalCurve& curve() const { return curve_; }

    // axis (co)energy at coordinate x; even in x
    double value(double x) const {
        const double a = std::abs(x);
        if (frame_ == Frame::Coenergy) return curve_.integral_b(a);
        return curve_.integral_s_db(curve_.invert_b(a));
    }

    double inverse(double w) const {
        if (w < 0.0) fail(errc::NegativeEnergy, "inverse map requires w >= 0");
        if (w == 0.0) return 0.0;
        if (frame_ == Frame::Coenergy) return curve_.invert_integral_b(w);
        return curve_.b(curve_.invert_integral_s_db(w));
    }

    InverseEval inverse_full(double w) const {
        if (w < 0.0) fail(errc::NegativeEnergy, "inverse map requires w >= 0");
        InverseEval ev;
        if (w == 0.0) {
            ev.d1 = std::numeric_limits<double>::infinity();
            return ev;
        }
        if (frame_ == Frame::Coenergy) {
            ev.x = curve_.invert_integral_b(w);
            const double bx = curve_.b(ev.x);
            ev.d1 = 1.0 / bx;
            ev.d2 = -curve_.db(ev.x) / (bx * bx * bx);
        } else {
            const double h = curve_.invert_integral_s_db(w);
            ev.x = curve_.b(h);
            ev.d1 = 1.0 / h;
            ev.d2 = -1.0 / (curve_.db(h) * h * h * h);
        }
        return ev;
    }

private:
    PrincipalCurve curve_;
    Frame frame_;
};

}  // namespace maganiso
