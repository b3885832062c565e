#include <doctest.h>

#include <cmath>

#include "abach/bachelier.hpp"
#include "abach/normal.hpp"

using namespace abach;
using namespace abach::num;

TEST_CASE("normal cdf and quantile agree with reference values") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(-10.0) == doctest::Approx(7.619853024160526e-24).epsilon(1e-13));
    CHECK(norm_pdf(10.0) == doctest::Approx(7.694598626706419e-23).epsilon(1e-13));
    CHECK(norm_ppf(0.975) == doctest::Approx(1.9599639845400542).epsilon(1e-13));
    CHECK(norm_ppf(1e-9) == doctest::Approx(-5.997807015007687).epsilon(1e-13));
    CHECK(norm_ppf(0.3) == doctest::Approx(-0.5244005127080408).epsilon(1e-13));
    for (double p : {1e-12, 1e-6, 0.2, 0.5, 0.9, 1.0 - 1e-10})
        CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK(std::exp(ln_norm_cdf(-20.0)) == doctest::Approx(norm_cdf(-20.0)).epsilon(1e-12));
    CHECK(ln_norm_cdf(-40.0) == doctest::Approx(-804.608442013754).epsilon(1e-10));
}

TEST_CASE("scaled complementary error function") {
    CHECK(erfcx(0.5) == doctest::Approx(0.6156903441929259).epsilon(1e-13));
    CHECK(erfcx(3.0) == doctest::Approx(0.17900115118138995).epsilon(1e-13));
    CHECK(erfcx(12.5) == doctest::Approx(0.04499209900102792).epsilon(1e-13));
}

TEST_CASE("mills tail factor stays accurate across the crossover") {
    // q(d) = 1 - d Phi(-d)/phi(d); direct evaluation below d = 3, continued
    // fraction above
    CHECK(mills_tail_factor(8.0) == doctest::Approx(1.4944293936541630e-02).epsilon(1e-12));
    CHECK(mills_tail_factor(10.0) == doctest::Approx(9.7140352826807860e-03).epsilon(1e-12));
    for (double d : {2.8, 2.9, 2.95, 3.0, 3.05, 3.1, 3.2}) {
        const double direct = 1.0 - d * norm_cdf(-d) / norm_pdf(d);
        CHECK(mills_tail_factor(d) == doctest::Approx(direct).epsilon(5e-12));
    }
}

TEST_CASE("normalized call matches the closed form and its deep tails") {
    CHECK(cb(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(cb(1.0, 2.0) ==
          doctest::Approx(-norm_cdf(-0.5) + 2.0 * norm_pdf(0.5)).epsilon(1e-15));
    // far out of the money the 99% cancellation must not leak into the result
    CHECK(cb(10.0, 1.0) == doctest::Approx(7.4745602545893280e-25).epsilon(1e-10));
    CHECK(cb(20.0, 1.0) == doctest::Approx(1.3700124947295799e-90).epsilon(1e-10));
    CHECK(cb(30.0, 1.0) == doctest::Approx(1.6319567340914012e-199).epsilon(1e-10));
}

TEST_CASE("parity: call minus put equals the forward minus strike") {
    for (double y : {0.3, 1.7, 6.0, 14.0})
        for (double s : {0.5, 1.0, 3.0})
            CHECK(cb(-y, s) - cb(y, s) == doctest::Approx(y).epsilon(1e-14));
}

TEST_CASE("time value and its logarithm are consistent") {
    for (double y : {0.0, 0.4, 2.0, 5.0, 12.0, 30.0}) {
        const double tv = cb_time_value(y, 1.0);
        CHECK(tv == doctest::Approx(cb_time_value(-y, 1.0)).epsilon(1e-13));
        CHECK(std::exp(log_cb_time_value(y, 1.0)) == doctest::Approx(tv).epsilon(1e-12));
    }
    // log form keeps working far beyond double underflow
    const double lt = log_cb_time_value(1e6, 1.0);
    CHECK(lt < -4.9e11);
    CHECK(std::isfinite(lt));
}

TEST_CASE("greeks match finite differences of the price") {
    const double y = 0.7, s = 1.3, h = 1e-5;
    const Greeks g = greeks(y, s);
    const double delta_fd = -(cb(y + h, s) - cb(y - h, s)) / (2 * h);
    const double vega_fd = (cb(y, s + h) - cb(y, s - h)) / (2 * h);
    const double gamma_fd = (cb(y + h, s) - 2 * cb(y, s) + cb(y - h, s)) / (h * h);
    const double vanna_fd =
        (cb(y + h, s + h) - cb(y + h, s - h) - cb(y - h, s + h) + cb(y - h, s - h)) /
        (4 * h * h);
    CHECK(g.delta == doctest::Approx(delta_fd).epsilon(1e-8));
    CHECK(g.vega == doctest::Approx(vega_fd).epsilon(1e-8));
    CHECK(g.gamma == doctest::Approx(gamma_fd).epsilon(1e-6));
    // delta is d/dF and y = K - F, so vanna = -d2(cb)/dy ds
    CHECK(std::abs(g.vanna + vanna_fd) < 1e-5);
}

TEST_CASE("implied vol round-trips through the price") {
    for (double y : {0.0, 0.5, 3.0, 8.0, 20.0, 30.0}) {
        const double tv = cb_time_value(y, 1.0);
        CHECK(implied_vol_from_time_value(std::abs(y), tv) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
    for (double sigma : {0.2, 1.0, 7.5}) {
        const double tv = cb_time_value(2.5, sigma);
        CHECK(implied_vol_from_time_value(2.5, tv) == doctest::Approx(sigma).epsilon(1e-10));
    }
}

TEST_CASE("implied vol from market quotes undoes the scaling") {
    const double sigma_b = 11.0, t = 0.7, B0 = 0.98, x = 3.5;
    const Quote q{x, t, B0, bachelier_call(x, t, B0, sigma_b)};
    CHECK(implied_vol(q) == doctest::Approx(sigma_b).epsilon(1e-10));

    const Quote itm{-4.0, t, B0, bachelier_call(-4.0, t, B0, sigma_b)};
    CHECK(implied_vol(itm) == doctest::Approx(sigma_b).epsilon(1e-10));
}

TEST_CASE("implied vol rejects unusable quotes") {
    CHECK_THROWS_AS(implied_vol(Quote{2.0, 1.0, 1.0, -0.01}), PriceBelowIntrinsic);
    // in-the-money call priced below intrinsic
    CHECK_THROWS_AS(implied_vol(Quote{-3.0, 1.0, 1.0, 2.9}), PriceBelowIntrinsic);
    CHECK_THROWS_AS(implied_vol(Quote{2.0, 1.0, 1.0, std::nan("")}), PriceNotFinite);
}
