#include <doctest.h>

#include <cmath>

#include "abach/pricer.hpp"
#include "abach/smile.hpp"

using namespace abach;

TEST_CASE("smile level at the money matches the expansion") {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    const SmileFunction sf(p);
    const auto ex = atm_expansion(p);
    CHECK(sf.atm_level() == doctest::Approx(smile_I(0.0, p)).epsilon(1e-13));
    CHECK(ex.level == doctest::Approx(sf.atm_level()).epsilon(1e-10));
    CHECK_FALSE(ex.by_finite_differences);
}

TEST_CASE("implied vol reprices the model exactly") {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    const SmileFunction sf(p);
    for (double y : {-6.0, -1.0, 0.0, 0.5, 4.0}) {
        CHECK(sf(y) == doctest::Approx(smile_I(y, p)).epsilon(1e-14));
        CHECK(sf.price(y) == doctest::Approx(lewis_call_normalized(y, p)).epsilon(1e-9));
        CHECK(sf.price(y) - sf.time_value(y) == doctest::Approx(std::max(-y, 0.0)));
    }
}

TEST_CASE("mirroring the skew mirrors the smile exactly") {
    const ModelParams p(VolCurve::constant(1.0), -0.7, 1.3, Alpha(0.5));
    const ModelParams m(VolCurve::constant(1.0), +0.7, 1.3, Alpha(0.5));
    for (double y = -5.0; y <= 5.0; y += 0.5)
        CHECK(smile_I(y, p) == smile_I(-y, m));

    const ModelParams even(VolCurve::constant(1.0), 0.0, 1.0, Alpha(0.5));
    for (double y : {0.25, 1.0, 3.5})
        CHECK(smile_I(y, even) == smile_I(-y, even));
}

TEST_CASE("analytic expansion agrees with finite differences at the money") {
    const double pairs[][2] = {{-0.6, 1.1}, {-1.0, 0.25}, {0.5, 0.5},
                               {1.0, 4.0},  {-0.3, 2.0},  {0.0, 1.0}};
    for (const auto& pr : pairs) {
        const ModelParams p(VolCurve::constant(1.0), pr[0], pr[1], Alpha(0.5));
        const auto an = atm_expansion(p);
        const auto fd = atm_expansion_fd(SmileFunction(p));
        CHECK(std::abs(an.level - fd.level) < 1e-8);
        CHECK(std::abs(an.slope - fd.slope) < 1e-5);
        CHECK(std::abs(an.curvature - fd.curvature) < 1e-4);
        CHECK(fd.by_finite_differences);
    }
}

TEST_CASE("pointwise derivatives agree with finite differences off the money") {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    for (double y : {-1.5, 0.8}) {
        const auto d = smile_derivatives(y, p);
        const double h = 1e-3;
        const double up = smile_I(y + h, p), dn = smile_I(y - h, p), mid = smile_I(y, p);
        CHECK(d.level == doctest::Approx(mid).epsilon(1e-12));
        CHECK(d.slope == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
        CHECK(d.curvature == doctest::Approx((up - 2 * mid + dn) / (h * h)).epsilon(1e-4));
    }
}

TEST_CASE("skew has the opposite sign of eta and scales with maturity") {
    // skewness of z is -eta^3 mu3(G) - 3 eta k, so with y = K - F moneyness a
    // positive eta tilts mass left and the smile falls in strike
    const VolCurve v = VolCurve::constant(1.0);
    CHECK(atm_expansion(ModelParams(v, -0.6, 1.1, Alpha(0.5))).slope > 0.0);
    CHECK(atm_expansion(ModelParams(v, +0.6, 1.1, Alpha(0.5))).slope < 0.0);
    CHECK(std::abs(atm_expansion(ModelParams(v, 0.0, 1.1, Alpha(0.5))).slope) < 1e-12);

    const ModelParams p(v, -0.6, 1.1, Alpha(0.5));
    const double s1 = atm_skew(p, 1.0);
    CHECK(atm_skew(p, 4.0) == doctest::Approx(0.5 * s1).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(atm_expansion(p).slope).epsilon(1e-12));
}

TEST_CASE("wing limits hit the strip roots") {
    const ModelParams p(VolCurve::constant(1.0), -0.5, 1.0, Alpha(0.5));
    const auto w = wing_limits(p);
    CHECK(w.left == doctest::Approx(0.30901699437494745).epsilon(1e-14));
    CHECK(w.right == doctest::Approx(0.80901699437494745).epsilon(1e-14));

    const auto sym = wing_limits(ModelParams(VolCurve::constant(1.0), 0.0, 1.0, Alpha(0.5)));
    CHECK(sym.left == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sym.right == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gaussian limit has a flat unit smile and no wings") {
    const auto p = ModelParams::bachelier(VolCurve::constant(2.0));
    for (double y : {-8.0, -0.5, 0.0, 3.0})
        CHECK(smile_I(y, p) == doctest::Approx(1.0).epsilon(1e-9));
    const auto w = wing_limits(p);
    CHECK(w.left == 0.0);
    CHECK(w.right == 0.0);
}

TEST_CASE("normalized smile rescales by the at-the-money level") {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    const SmileFunction sf(p);
    CHECK(sf.normalized(0.0) == doctest::Approx(1.0).epsilon(1e-13));
    const double i0 = sf.atm_level();
    for (double chi : {-2.0, 0.75, 3.0})
        CHECK(sf.normalized(chi) == doctest::Approx(sf(chi * i0) / i0).epsilon(1e-13));
}
