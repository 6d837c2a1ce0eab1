#pragma once

#include <random>
#include <utility>
#include <vector>

#include "closed_form.hpp"
#include "core.hpp"
#include "implicit_model.hpp"
#include "material_law.hpp"

namespace maganiso {

struct Polyline {
    std::vector<double> angles;  // parameter per vertex (ray angle θ or induction angle φ)
    std::vector<Vec2> points;
    bool closed = false;
};

struct Box {
    Vec2 lo, hi;
};

struct GridSpec {
    Box box;
    int n = 601;  // points per side
};

// exact on-axis radius of the level contour (anchors the radial tracer)
inline double axis_radius(const ImplicitModel& m, int axis, double level) {
    return m.axis(axis).inverse(level);
}
inline double axis_radius(const PNormModel& m, int axis, double level) {
    const double a = axis == 0 ? m.scale1() : m.scale2();
    return std::sqrt(2.0 * level) / a;
}

// Brute-force Legendre transform sup_b ⟨h,b⟩ − w(b) on the grid.
// O(spacing) accurate; the caller's tolerance is 5·spacing·|h|.
template <class Model>
double legendre_oracle(const Model& m, Vec2 h, const GridSpec& grid) {
    const int n = grid.n;
    if (n < 2) fail(errc::UsageError, "legendre grid needs at least 2 points per side");
    const double dx = (grid.box.hi.x1 - grid.box.lo.x1) / (n - 1);
    const double dy = (grid.box.hi.x2 - grid.box.lo.x2) / (n - 1);
    std::vector<double> row_best(n);
    std::vector<int> row_arg(n);
    detail::parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        const double b2 = grid.box.lo.x2 + dy * static_cast<double>(i);
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int j = 0; j < n; ++j) {
            const double b1 = grid.box.lo.x1 + dx * j;
            const Vec2 b{b1, b2};
            const double v = h.dot(b) - value(m, b);
            if (v > best) { best = v; arg = j; }
        }
        row_best[i] = best;
        row_arg[i] = arg;
    });
    double best = row_best[0];
    int bi = 0;
    for (int i = 1; i < n; ++i)
        if (row_best[i] > best) { best = row_best[i]; bi = i; }
    const int bj = row_arg[bi];
    if (bi == 0 || bi == n - 1 || bj == 0 || bj == n - 1)
        fail(errc::ArgmaxOnBoundary, "Legendre supremum attained on the grid edge");
    return best;
}

namespace detail {

// direction for sample k of `samples` over [0, 2π): quarter turns get exact axis vectors
inline Vec2 ray_direction(int k, int samples, double& theta) {
    theta = 2.0 * 3.14159265358979323846 * k / samples;
    const long q = static_cast<long>(k) * 4;
    if (q % samples == 0) {
        switch ((q / samples) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    return {std::cos(theta), std::sin(theta)};
}

template <class Model>
double radial_solve(const Model& m, Vec2 d, double level, double r_hint) {
    if (d.x2 == 0.0) return axis_radius(m, 0, level);
    if (d.x1 == 0.0) return axis_radius(m, 1, level);
    auto g = [&](double r) { return value(m, Vec2{r * d.x1, r * d.x2}) - level; };
    double hi = r_hint > 0.0 ? r_hint : 1.0;
    double lo = 0.0;
    double ghi = g(hi);
    int guard = 0;
    while (ghi < 0.0 && guard++ < 400) { lo = hi; hi *= 2.0; ghi = g(hi); }
    if (ghi < 0.0) fail(errc::NoBracket, "level not reached along the ray");
    double glo = g(lo);
    while (glo > 0.0 && guard++ < 400) { hi = lo; ghi = glo; lo *= 0.5; glo = g(lo); }
    if (glo > 0.0) fail(errc::NoBracket, "ray bracket collapse");
    RootTolerances tol;
    tol.f_tol = 1e-14 * std::max(1.0, level);
    tol.x_abs = 0.0;
    tol.x_rel = 1e-15;
    const auto res = newton_bisection(
        g, [&](double r) { return gradient(m, Vec2{r * d.x1, r * d.x2}).dot(d); }, lo, hi, glo,
        ghi, tol);
    return res.x;
}

}  // namespace detail

// Closed contour of equal (co)energy, one radial solve per ray (coercivity makes the
// value strictly increasing along rays, so the bracketed solve is well-posed).
template <class Model>
Polyline trace_contour(const Model& m, double level, int samples) {
    if (!(level > 0.0)) fail(errc::NonPositiveLevel, "contour level must be positive");
    if (samples < 3) fail(errc::UsageError, "closed contour needs at least 3 samples");
    Polyline poly;
    poly.closed = true;
    poly.angles.resize(samples);
    poly.points.resize(samples);
    const double r0 = axis_radius(m, 0, level);
    detail::parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
        double theta;
        const Vec2 d = detail::ray_direction(static_cast<int>(k), samples, theta);
        const double r = detail::radial_solve(m, d, level, r0);
        poly.angles[k] = theta;
        poly.points[k] = {r * d.x1, r * d.x2};
    });
    return poly;
}

namespace detail {

// Damped Newton inversion of the material law: find x with gradient(m, x) = target.
template <class Model>
Vec2 invert_gradient(const Model& m, Vec2 target, Vec2 start, int max_iter = 60) {
    Vec2 x = start;
    Vec2 r = gradient(m, x) - target;
    double rn = r.norm();
    const double goal = 1e-12 * std::max(1.0, target.norm());
    for (int it = 0; it < max_iter; ++it) {
        if (rn <= goal) return x;
        const SymTensor2 J = hessian(m, x);
        const double det = J.det();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det))
            fail(errc::NewtonDiverged, "singular Jacobian in the law inversion");
        const Vec2 step{-(J.t22 * r.x1 - J.t12 * r.x2) / det,
                        -(J.t11 * r.x2 - J.t12 * r.x1) / det};
        double lam = 1.0;
        bool accepted = false;
        for (int half = 0; half <= 40; ++half) {  // halve on residual increase
            const Vec2 xn = x + lam * step;
            const Vec2 rr = gradient(m, xn) - target;
            const double rrn = rr.norm();
            if (rrn < rn) {
                x = xn; r = rr; rn = rrn; accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if (!accepted) fail(errc::NewtonDiverged, "damping exhausted in the law inversion");
    }
    if (rn <= goal) return x;
    fail(errc::NewtonDiverged, "law inversion did not reach tolerance");
}

// h reaching induction b: direct gradient in the energy frame, Newton in the coenergy
// frame (seeded from `seed` when finite, else from the axis-law scaling).
template <class Model>
Vec2 h_of_b(const Model& m, Vec2 b, const Vec2* seed) {
    if (m.frame == Frame::Energy) return gradient(m, b);
    if (b.x2 == 0.0 || b.x1 == 0.0) {
        // on-axis inversion is scalar and exact: x̂ᵢ at the axis energy of |bᵢ|
        const int i = b.x2 == 0.0 ? 0 : 1;
        const double bi = i == 0 ? b.x1 : b.x2;
        double h;
        if constexpr (std::is_same_v<std::decay_t<Model>, PNormModel>) {
            const double a = i == 0 ? m.scale1() : m.scale2();
            h = std::abs(bi) / (a * a);  // axis law b = a²·h
        } else {
            h = m.axis(i).curve().invert_b(std::abs(bi));
        }
        h = bi < 0.0 ? -h : h;
        return i == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
    }
    Vec2 start;
    if (seed && seed->finite() && seed->x1 != 0.0 && seed->x2 != 0.0) {
        // an on-axis seed is useless: the transverse permeability vanishes there for e > 2
        start = *seed;
    } else if constexpr (std::is_same_v<std::decay_t<Model>, PNormModel>) {
        start = {b.x1 / (m.scale1() * m.scale1()), b.x2 / (m.scale2() * m.scale2())};
    } else {
        start = {m.axis(0).curve().invert_b(std::abs(b.x1)) * detail::sgn(b.x1),
                 m.axis(1).curve().invert_b(std::abs(b.x2)) * detail::sgn(b.x2)};
    }
    return invert_gradient(m, b, start);
}

}  // namespace detail

// Locus of h-points for constant induction magnitude |b|, sampled over φ ∈ [0, 2π).
template <class Model>
Polyline locus_constant_induction(const Model& m, double b_magnitude, int samples) {
    if (!(b_magnitude > 0.0)) fail(errc::UsageError, "locus needs |b| > 0");
    if (samples < 3) fail(errc::UsageError, "locus needs at least 3 samples");
    Polyline poly;
    poly.closed = true;
    poly.angles.resize(samples);
    poly.points.resize(samples);
    if (m.frame == Frame::Energy) {
        detail::parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
            double phi;
            const Vec2 d = detail::ray_direction(static_cast<int>(k), samples, phi);
            poly.angles[k] = phi;
            poly.points[k] = gradient(m, b_magnitude * d);
        });
        return poly;
    }
    // coenergy frame: angle continuation, previous solution seeds the next Newton
    Vec2 prev{};
    bool have_prev = false;
    for (int k = 0; k < samples; ++k) {
        double phi;
        const Vec2 d = detail::ray_direction(k, samples, phi);
        const Vec2 h = detail::h_of_b(m, b_magnitude * d, have_prev ? &prev : nullptr);
        poly.angles[k] = phi;
        poly.points[k] = h;
        prev = h;
        have_prev = true;
    }
    return poly;
}

struct HardAxisResult {
    double angle = 0.0;       // radians in [0, π/2]
    double h_magnitude = 0.0; // |h| at the returned angle
    bool degenerate = false;  // all sampled angles tie (isotropic model)
};

// Direction of hard magnetization: argmax over φ ∈ [0, π/2] of |h(b(φ))| at fixed |b|,
// coarse sampling refined to 1e-4 rad by golden-section search.
template <class Model>
HardAxisResult hard_axis(const Model& m, double b_magnitude, int samples = 64) {
    if (!(b_magnitude > 0.0)) fail(errc::UsageError, "hard_axis needs |b| > 0");
    if (samples < 4) samples = 4;
    const double half_pi = 0.5 * 3.14159265358979323846;
    Vec2 carry{};
    bool have_carry = false;
    auto hmag = [&](double phi) {
        const Vec2 d = phi == 0.0 ? Vec2{1.0, 0.0}
                       : (phi == half_pi ? Vec2{0.0, 1.0} : Vec2{std::cos(phi), std::sin(phi)});
        const Vec2 h = detail::h_of_b(m, b_magnitude * d, have_carry ? &carry : nullptr);
        carry = h;
        have_carry = true;
        return h.norm();
    };
    std::vector<double> fs(samples + 1);
    double fmax = -1.0, fmin = std::numeric_limits<double>::infinity();
    int kmax = 0;
    for (int k = 0; k <= samples; ++k) {
        fs[k] = hmag(half_pi * k / samples);
        if (fs[k] > fmax) { fmax = fs[k]; kmax = k; }
        fmin = std::min(fmin, fs[k]);
    }
    HardAxisResult out;
    if (fmax - fmin <= 1e-12 * std::max(1.0, fmax)) {
        out.degenerate = true;
        out.angle = 0.0;
        out.h_magnitude = fmax;
        return out;
    }
    double a = half_pi * std::max(kmax - 1, 0) / samples;
    double b = half_pi * std::min(kmax + 1, samples) / samples;
    const double gr = 0.6180339887498948482;  // (√5−1)/2
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = hmag(c1), f2 = hmag(c2);
    while (b - a > 1e-4) {
        if (f1 < f2) { a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a); f2 = hmag(c2); }
        else { b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a); f1 = hmag(c1); }
    }
    out.angle = 0.5 * (a + b);
    out.h_magnitude = hmag(out.angle);
    return out;
}

struct ConvexityReport {
    Box region;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    Vec2 min_eig_location;
    std::vector<std::pair<double, bool>> contour_convex;  // (level, convex?)
    long midpoint_violations = 0;
    long midpoint_trials = 0;
    long eig_points = 0;
};

namespace detail {

inline bool polygon_convex(const Polyline& poly, double scale) {
    const std::size_t n = poly.points.size();
    if (n < 3) return false;
    double sign = 0.0;
    const double tol = 1e-10 * scale;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p0 = poly.points[i];
        const Vec2& p1 = poly.points[(i + 1) % n];
        const Vec2& p2 = poly.points[(i + 2) % n];
        const double cross =
            (p1.x1 - p0.x1) * (p2.x2 - p1.x2) - (p1.x2 - p0.x2) * (p2.x1 - p1.x1);
        if (std::abs(cross) <= tol) continue;
        if (sign == 0.0) sign = cross > 0.0 ? 1.0 : -1.0;
        else if ((cross > 0.0 ? 1.0 : -1.0) != sign) return false;
    }
    return true;
}

}  // namespace detail

// Hessian eigenvalues on a grid (skipping bands of width 1e-6 around the axes and the
// origin), midpoint-convexity spot checks on random triples, and polygon convexity of
// traced contours. Deterministic: fixed RNG seed, index-ordered reductions.
template <class Model>
ConvexityReport convexity_scan(const Model& m, Box region, int grid_n = 41,
                               long midpoint_trials = 10000, int contour_samples = 128) {
    ConvexityReport rep;
    rep.region = region;
    const int n = std::max(grid_n, 2);
    const double dx = (region.hi.x1 - region.lo.x1) / (n - 1);
    const double dy = (region.hi.x2 - region.lo.x2) / (n - 1);

    struct Cell { double eig; Vec2 at; bool used; };
    std::vector<Cell> cells(static_cast<std::size_t>(n) * n);
    detail::parallel_for(cells.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / n, j = static_cast<int>(idx) % n;
        const Vec2 p{region.lo.x1 + dx * i, region.lo.x2 + dy * j};
        Cell& c = cells[idx];
        c.used = false;
        if (std::abs(p.x1) <= 1e-6 || std::abs(p.x2) <= 1e-6) return;  // axis/origin bands
        c.eig = hessian(m, p).eig_min();
        c.at = p;
        c.used = true;
    });
    for (const auto& c : cells) {
        if (!c.used) continue;
        ++rep.eig_points;
        if (c.eig < rep.min_eigenvalue) {
            rep.min_eigenvalue = c.eig;
            rep.min_eig_location = c.at;
        }
    }

    std::mt19937_64 rng(0x6d6167616e69736fULL);
    std::uniform_real_distribution<double> ux(region.lo.x1, region.hi.x1);
    std::uniform_real_distribution<double> uy(region.lo.x2, region.hi.x2);
    std::vector<Vec2> pts(2 * static_cast<std::size_t>(midpoint_trials));
    for (auto& p : pts) p = {ux(rng), uy(rng)};
    std::vector<char> viol(midpoint_trials, 0);
    detail::parallel_for(static_cast<std::size_t>(midpoint_trials), [&](std::size_t k) {
        const Vec2 x = pts[2 * k], y = pts[2 * k + 1];
        const Vec2 mid = 0.5 * (x + y);
        const double vm = value(m, mid);
        const double avg = 0.5 * (value(m, x) + value(m, y));
        viol[k] = vm > avg + 1e-12 * std::max(1.0, std::abs(avg)) ? 1 : 0;
    });
    rep.midpoint_trials = midpoint_trials;
    for (char v : viol) rep.midpoint_violations += v;

    const double corner = value(m, Vec2{region.hi.x1, region.hi.x2});
    for (double fraction : {0.15, 0.45, 0.75}) {
        const double level = corner * fraction;
        if (!(level > 0.0)) continue;
        const auto poly = trace_contour(m, level, contour_samples);
        double rmax = 0.0;
        for (const auto& p : poly.points) rmax = std::max(rmax, p.norm());
        rep.contour_convex.emplace_back(level, detail::polygon_convex(poly, rmax * rmax));
    }
    return rep;
}

}  // namespace maganiso
