#include "doctest.h"
#include "maganiso/closed_form.hpp"

#include <cmath>
#include <random>

using namespace maganiso;

namespace {

errc code_of(void (*f)()) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return errc::UsageError;
}

}  // namespace

TEST_CASE("p-norm values: construction, scaling, frozen references") {
    auto n2 = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 2.0);
    CHECK(pnorm_value(n2, {2.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pnorm_value(n2, {0.0, 0.0}) == 0.0);
    CHECK(pnorm_value(n2, {-2.0, 1.0}) == pnorm_value(n2, {2.0, 1.0}));

    auto n43 = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    CHECK(pnorm_value(n43, {1.0, 1.0}) ==
          doctest::Approx(0.51129848589856339).epsilon(1e-15));

    // energy frame multiplies by the coefficients instead of dividing
    auto p2 = PNormModel::make(Frame::Energy, 2.0, 1.0, 2.0);
    CHECK(pnorm_value(p2, {1.0, 1.0}) == doctest::Approx(2.5).epsilon(1e-15));

    CHECK(code_of([] { PNormModel::make(Frame::Coenergy, 0.0, 1.0, 2.0); }) ==
          errc::NonPositiveCoefficient);
    CHECK(code_of([] { PNormModel::make(Frame::Coenergy, 1.0, 1.0, 0.9); }) ==
          errc::ExponentTooSmall);
}

TEST_CASE("squared-norm homogeneity: w(λx) = λ² w(x), ∇w(λx) = λ ∇w(x)") {
    auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    const Vec2 x{0.7, -1.9};
    for (double lam : {0.25, 3.0, 40.0}) {
        CHECK(pnorm_value(m, {lam * x.x1, lam * x.x2}) ==
              doctest::Approx(lam * lam * pnorm_value(m, x)).epsilon(1e-13));
        const Vec2 g = pnorm_gradient(m, x);
        const Vec2 gl = pnorm_gradient(m, {lam * x.x1, lam * x.x2});
        CHECK(gl.x1 == doctest::Approx(lam * g.x1).epsilon(1e-13));
        CHECK(gl.x2 == doctest::Approx(lam * g.x2).epsilon(1e-13));
    }
}

TEST_CASE("p-norm gradient matches the frozen reference and finite differences") {
    auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    const Vec2 g = pnorm_gradient(m, {1.0, 1.0});
    CHECK(g.x1 == doctest::Approx(0.048329774198921879).epsilon(1e-14));
    CHECK(g.x2 == doctest::Approx(0.97426719759820489).epsilon(1e-14));
    for (Vec2 p : {Vec2{1.5, -0.8}, Vec2{-2.0, -3.0}, Vec2{0.1, 4.0}}) {
        const Vec2 gr = pnorm_gradient(m, p);
        const double step = 1e-6;
        const double fdx =
            (pnorm_value(m, {p.x1 + step, p.x2}) - pnorm_value(m, {p.x1 - step, p.x2})) /
            (2 * step);
        const double fdy =
            (pnorm_value(m, {p.x1, p.x2 + step}) - pnorm_value(m, {p.x1, p.x2 - step})) /
            (2 * step);
        CHECK(gr.x1 == doctest::Approx(fdx).epsilon(1e-7));
        CHECK(gr.x2 == doctest::Approx(fdy).epsilon(1e-7));
    }
}

TEST_CASE("p-norm hessian: closed form vs finite differences, axis rules") {
    auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    const Vec2 p{1.3, -0.4};
    const auto H = pnorm_hessian(m, p);
    const double step = 1e-5;
    const Vec2 g1p = pnorm_gradient(m, {p.x1 + step, p.x2});
    const Vec2 g1m = pnorm_gradient(m, {p.x1 - step, p.x2});
    const Vec2 g2p = pnorm_gradient(m, {p.x1, p.x2 + step});
    const Vec2 g2m = pnorm_gradient(m, {p.x1, p.x2 - step});
    CHECK(H.t11 == doctest::Approx((g1p.x1 - g1m.x1) / (2 * step)).epsilon(1e-7));
    CHECK(H.t12 == doctest::Approx((g2p.x1 - g2m.x1) / (2 * step)).epsilon(1e-7));
    CHECK(H.t22 == doctest::Approx((g2p.x2 - g2m.x2) / (2 * step)).epsilon(1e-7));

    // e = 2 is globally smooth, even on axes and at the origin's neighbourhood
    auto q = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 2.0);
    const auto Hq = pnorm_hessian(q, {5.0, 0.0});
    CHECK(Hq.t11 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(Hq.t22 == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(code_of([] {
        auto mm = PNormModel::make(Frame::Energy, 2.0, 1.0, 1.3);
        pnorm_hessian(mm, {1.0, 0.0});
    }) == errc::AxisSingularity);
    // e = 2 stays the constant quadratic even at the origin...
    const auto H0 = pnorm_hessian(q, {0.0, 0.0});
    CHECK(H0.t11 == doctest::Approx(0.25).epsilon(1e-15));
    // ...while any other exponent has no second derivative there
    CHECK(code_of([] {
        auto mm = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
        pnorm_hessian(mm, {0.0, 0.0});
    }) == errc::OriginSingularity);
    CHECK(code_of([] {
        auto mm = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 1.0);
        pnorm_gradient(mm, {0.0, 0.0});
    }) == errc::DegenerateDiscriminant);
    // e > 1: gradient at the origin is the zero vector
    CHECK(pnorm_gradient(m, {0.0, 0.0}).is_zero());
}

TEST_CASE("conjugate exponents pair n with n/(n-1)") {
    CHECK(conjugate_exponent(2.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(conjugate_exponent(13.0 / 3.0) == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(conjugate_exponent(1.3) == doctest::Approx(13.0 / 3.0).epsilon(1e-14));
    CHECK(code_of([] { conjugate_exponent(1.0); }) == errc::ExponentNotConjugable);

    auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    auto d = conjugate(m);
    CHECK(d.frame == Frame::Energy);
    CHECK(d.exponent == doctest::Approx(1.3).epsilon(1e-15));
    // Young equality at a conjugate pair (h, b = ∇w*(h))
    const Vec2 h{1.2, 0.8};
    const Vec2 b = pnorm_gradient(m, h);
    CHECK(pnorm_value(m, h) + pnorm_value(d, b) ==
          doctest::Approx(h.x1 * b.x1 + h.x2 * b.x2).epsilon(1e-13));
}

TEST_CASE("midpoint convexity holds for all e >= 1 over random triples") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (double e : {1.0, 1.5, 2.0, 13.0 / 3.0}) {
        auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, e);
        for (int k = 0; k < 10000; ++k) {
            const Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
            const Vec2 mid{0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2)};
            const double lhs = pnorm_value(m, mid);
            const double rhs = 0.5 * (pnorm_value(m, a) + pnorm_value(m, b));
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("special-model value equals the p-norm closed form when axes are proportional") {
    auto m = PNormModel::make(Frame::Coenergy, 2.0, 1.0, 13.0 / 3.0);
    auto co1 = AxisProfile(PrincipalCurve::linear(2.0), Frame::Coenergy);
    auto co2 = AxisProfile(PrincipalCurve::linear(1.0), Frame::Coenergy);
    SpecialModel sp(co1, co2, 13.0 / 3.0);
    for (double x1 : {-3.0, -0.5, 0.0, 1.0, 2.5})
        for (double x2 : {-2.0, 0.0, 0.7, 4.0}) {
            const double want = pnorm_value(m, {x1, x2});
            CHECK(special_value(sp, {x1, x2}) ==
                  doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("special-model construction rejects non-proportional axis pairs") {
    const std::vector<std::pair<double, double>> tanh_like = {
        {0, 0.0},   {50, 0.121096}, {100, 0.241271}, {200, 0.475345},
        {300, 0.695879}, {400, 0.898023}, {500, 1.07874}, {600, 1.23678},
        {700, 1.37242},  {800, 1.48703},  {900, 1.58267}, {1000, 1.66174}};
    auto t1 = AxisProfile(PrincipalCurve::tabulated(tanh_like), Frame::Coenergy);
    auto t2 = AxisProfile(PrincipalCurve::linear(1.0), Frame::Coenergy);
    CHECK_THROWS_AS(SpecialModel(t1, t2, 2.0), Error);
    try {
        SpecialModel sp(t1, t2, 2.0);
    } catch (const Error& e) {
        CHECK(e.code() == errc::ProportionalityViolated);
    }
}
