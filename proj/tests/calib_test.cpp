#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "abach/calib.hpp"
#include "abach/smile.hpp"
#include "abach/synth.hpp"

using namespace abach;

namespace {

// three-expiry market, small enough to keep the full cascade fast
SynthConfig small_config() {
    SynthConfig cfg;
    cfg.expiry_days = {44, 167, 350};
    cfg.sigma = {15.0, 12.1, 10.6};
    cfg.strike_span = 20.0;
    return cfg;
}

}  // namespace

TEST_CASE("parity regression recovers discount and forward exactly") {
    const auto mkt = synth_market(small_config());
    for (const auto& slice : mkt.chain.expiries) {
        const auto df = fit_discount_forward_slice(slice, &mkt.ois);
        CHECK(df.usable);
        CHECK(df.B0 == doctest::Approx(std::exp(-0.01 * slice.t)).epsilon(1e-12));
        CHECK(std::abs(df.F0 - 40.0) < 1e-10);
        CHECK(df.max_parity_residual < 1e-10);
        CHECK(std::abs(df.spread_bps) < 1e-6);
        CHECK(df.couples > 50);
    }
}

TEST_CASE("parity regression reports its failure modes") {
    ChainSlice slice;
    slice.expiry = "2020-06-12";
    slice.t = 44.0 / 365.0;
    slice.rows = {{40.0, 1.5, 1.5}};
    CHECK_THROWS_AS(fit_discount_forward_slice(slice, nullptr), TooFewCouples);

    // C - P increasing in strike implies a non-positive discount
    slice.rows = {{39.0, 1.0, 2.0}, {40.0, 1.5, 1.5}, {41.0, 2.0, 1.0}};
    CHECK_THROWS_AS(fit_discount_forward_slice(slice, nullptr), NonPositiveDiscount);

    const auto mkt = synth_market(small_config());
    const auto df = fit_discount_forward_slice(mkt.chain.expiries[0], nullptr);
    CHECK(df.usable);
    CHECK(std::isnan(df.spread_bps));
}

TEST_CASE("whole-chain regression records exclusions instead of throwing") {
    auto mkt = synth_market(small_config());
    mkt.chain.expiries[1].rows.resize(1);
    const auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    REQUIRE(dfs.size() == 3);
    CHECK(dfs[0].usable);
    CHECK_FALSE(dfs[1].usable);
    CHECK(dfs[1].status.find("TooFewCouples") != std::string::npos);
    CHECK(dfs[2].usable);
}

TEST_CASE("first expiry is dropped when it funds away from the curve") {
    auto cfg = small_config();
    cfg.first_spread_bps = 300.0;
    auto mkt = synth_market(cfg);
    auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    CHECK(dfs[0].spread_bps == doctest::Approx(300.0).epsilon(1e-6));
    const auto mask = filter_first_expiry(dfs);
    CHECK_FALSE(mask[0]);
    CHECK(mask[1]);
    CHECK(mask[2]);
    CHECK_FALSE(dfs[0].usable);
    CHECK(dfs[0].status.find("excluded") != std::string::npos);

    cfg.first_spread_bps = 2.0;
    auto mkt2 = synth_market(cfg);
    auto dfs2 = fit_discount_forward(mkt2.chain, &mkt2.ois);
    const auto mask2 = filter_first_expiry(dfs2);
    CHECK(mask2[0]);
    CHECK(dfs2[0].usable);
}

TEST_CASE("the spread filter only ever looks at the first expiry") {
    auto mkt = synth_market(small_config());
    auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    dfs[1].spread_bps = 500.0;  // later expiries are not the filter's business
    const auto mask = filter_first_expiry(dfs);
    CHECK(mask[0]);
    CHECK(mask[1]);
    CHECK(dfs[1].usable);
}

TEST_CASE("filtering without an OIS spread is refused") {
    auto mkt = synth_market(small_config());
    auto dfs = fit_discount_forward(mkt.chain, nullptr);
    CHECK_THROWS_AS(filter_first_expiry(dfs), MissingOisCurve);
}

TEST_CASE("at-the-money vol matches the model smile level") {
    const auto cfg = small_config();
    const auto mkt = synth_market(cfg);
    const auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    const auto atms = fit_atm_vol(mkt.chain, dfs);
    const double i0 = atm_expansion(mkt.truth).level;
    REQUIRE(atms.size() == 3);
    for (size_t i = 0; i < atms.size(); ++i) {
        CHECK(atms[i].usable);
        CHECK_FALSE(atms[i].variance_decreasing);
        const double sigma_model = mkt.truth.sigma.sigma(atms[i].t);
        CHECK(atms[i].sigma_atm == doctest::Approx(sigma_model * i0).epsilon(1e-8));
    }
}

TEST_CASE("atm fit needs quotes bracketing the forward") {
    const auto mkt = synth_market(small_config());
    const auto df = fit_discount_forward_slice(mkt.chain.expiries[0], &mkt.ois);
    ChainSlice oneside = mkt.chain.expiries[0];
    oneside.rows.erase(
        std::remove_if(oneside.rows.begin(), oneside.rows.end(),
                       [&](const CoupleRow& r) { return r.strike >= df.F0 - 0.25; }),
        oneside.rows.end());
    CHECK_THROWS_AS(fit_atm_vol_slice(oneside, df), NoBracketingQuotes);
}

TEST_CASE("smile objective vanishes at the generating parameters") {
    const auto mkt = synth_market(small_config());
    const auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    const auto atms = fit_atm_vol(mkt.chain, dfs);
    SmileFitConfig cfg;
    auto quotes = prepare_smile_quotes(mkt.chain, dfs, atms, cfg);
    REQUIRE(quotes.size() > 100);

    const double at_truth = smile_objective(quotes, -0.6, 1.1, Alpha(0.5));
    CHECK(at_truth < 1e-10);
    CHECK(smile_objective(quotes, -0.3, 1.1, Alpha(0.5)) > 100 * at_truth);
    CHECK(smile_objective(quotes, -0.6, 1.8, Alpha(0.5)) > 100 * at_truth);

    std::vector<double> resid;
    smile_objective(quotes, -0.6, 1.1, Alpha(0.5), &resid);
    CHECK(resid.size() == quotes.size());

    // objective is a plain sum; the quote order cannot matter beyond roundoff
    auto shuffled = quotes;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(42));
    CHECK(smile_objective(shuffled, -0.45, 1.3, Alpha(0.5)) ==
          doctest::Approx(smile_objective(quotes, -0.45, 1.3, Alpha(0.5))).epsilon(1e-12));
}

TEST_CASE("noiseless cascade recovers the generating parameters") {
    const auto mkt = synth_market(small_config());
    SmileFitConfig cfg;
    cfg.multistarts = 3;
    const auto res = run_cascade(mkt.chain, mkt.ois, cfg);

    CHECK(res.value_date == "2020-04-29");
    CHECK(std::abs(res.eta - (-0.6)) < 1e-3);
    CHECK(std::abs(res.k - 1.1) < 1e-3);
    CHECK(res.objective < 1e-9);
    CHECK(res.trace.converged);
    CHECK_FALSE(res.trace.at_bound);
    CHECK(res.trace.starts.size() == 3);
    CHECK(res.trace.evaluations > 0);

    REQUIRE(res.sigma_values.size() == 3);
    for (size_t i = 0; i < res.sigma_values.size(); ++i) {
        CHECK(res.expiries[i].included);
        const double sigma_true = mkt.truth.sigma.sigma(res.sigma_times[i]);
        CHECK(res.sigma_values[i] == doctest::Approx(sigma_true).epsilon(1e-5));
    }
    CHECK(res.i0 == doctest::Approx(atm_expansion(mkt.truth).level).epsilon(1e-4));

    const ModelParams fitted = res.params();
    CHECK(fitted.alpha.is_inverse_gaussian());
    CHECK(fitted.sigma.sigma(res.sigma_times[1]) ==
          doctest::Approx(res.sigma_values[1]).epsilon(1e-12));
}

TEST_CASE("per-expiry fits agree on the shared parameters for synthetic data") {
    const auto mkt = synth_market(small_config());
    const auto dfs = fit_discount_forward(mkt.chain, &mkt.ois);
    const auto atms = fit_atm_vol(mkt.chain, dfs);
    SmileFitConfig cfg;
    cfg.multistarts = 3;
    const auto fits = fit_levy_fixed_ttm(mkt.chain, dfs, atms, cfg);
    REQUIRE(fits.size() == 3);
    for (const auto& f : fits) {
        CHECK(f.ok);
        CHECK(std::abs(f.eta - (-0.6)) < 1e-3);
        CHECK(std::abs(f.k - 1.1) < 1e-3);
        CHECK(f.quotes_used > 10);
    }
}
