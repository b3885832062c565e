#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "abach/market.hpp"
#include "abach/types.hpp"

namespace abach {

// Stage 1 output for one expiry: implied discount factor and synthetic
// forward from the put-call parity regression C - P = B0 (F0 - K).
struct DiscountForward {
    std::string expiry;
    double t = 0.0;
    double B0 = std::numeric_limits<double>::quiet_NaN();
    double F0 = std::numeric_limits<double>::quiet_NaN();
    int couples = 0;
    double max_parity_residual = std::numeric_limits<double>::quiet_NaN();
    // |implied funding rate - OIS zero rate| in bps; NaN without an OIS curve
    double spread_bps = std::numeric_limits<double>::quiet_NaN();
    bool usable = false;
    std::string status;  // "ok" or the exclusion reason
};

// OLS of C - P on K over the couples of one expiry. Throws TooFewCouples
// (fewer than two distinct both-sided strikes) or NonPositiveDiscount
// (regression slope >= 0).
DiscountForward fit_discount_forward_slice(const ChainSlice& slice, const OisCurve* ois);

// Whole-chain variant: exclusions are recorded per expiry instead of thrown.
std::vector<DiscountForward> fit_discount_forward(const MarketChain& chain,
                                                  const OisCurve* ois);

// First-expiry liquidity rule: the shortest expiry stays only while its
// OIS spread is strictly below the threshold; later expiries are untouched.
// Returns the inclusion mask and records the exclusion reason in place.
std::vector<bool> filter_first_expiry(std::vector<DiscountForward>& curves,
                                      double threshold_bps = 20.0);

// Stage 2 output for one expiry.
struct AtmVolPoint {
    std::string expiry;
    double t = 0.0;
    double sigma_atm = std::numeric_limits<double>::quiet_NaN();
    double source_price = std::numeric_limits<double>::quiet_NaN();
    bool variance_decreasing = false;  // (sigma_atm)^2 t dipped vs previous expiry
    bool usable = false;
    std::string status;
};

// ATM vol from the two OTM quotes bracketing x = 0 (put below, call above),
// linear in x; a quote sitting exactly at the forward is used directly.
// Throws NoBracketingQuotes when either side is missing.
AtmVolPoint fit_atm_vol_slice(const ChainSlice& slice, const DiscountForward& df);
std::vector<AtmVolPoint> fit_atm_vol(const MarketChain& chain,
                                     const std::vector<DiscountForward>& dfs);

struct SmileFitConfig {
    Alpha alpha{0.5};
    double window = 30.0;                // |x| cap in price units, inclusive
    double spread_threshold_bps = 20.0;  // first-expiry rule (run_cascade)
    bool vega_weighted = false;          // weight residuals by phi(chi)
    int multistarts = 8;
    int max_iterations = 400;            // Nelder-Mead budget per start
    double simplex_tol = 1e-6;           // simplex diameter convergence
    double eta_lo = -3.0, eta_hi = 3.0;  // projection bounds
    double lnk_lo = -4.0, lnk_hi = 2.0;
};

struct OptimizerTrace {
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
    bool at_bound = false;  // optimum pinned to a projection bound
    // one row per multistart: eta, k, objective at that start's optimum
    std::vector<std::array<double, 3>> starts;
};

struct ExpiryReport {
    std::string expiry;
    double t = 0.0;
    DiscountForward df;
    double sigma_atm = std::numeric_limits<double>::quiet_NaN();
    double sigma_model = std::numeric_limits<double>::quiet_NaN();  // sigma_atm / I0
    int quotes_used = 0;
    double mse = std::numeric_limits<double>::quiet_NaN();
    bool included = false;
    std::string status;
};

struct CalibrationResult {
    std::string value_date;
    double eta = std::numeric_limits<double>::quiet_NaN();
    double k = std::numeric_limits<double>::quiet_NaN();
    double alpha = 0.5;
    double i0 = std::numeric_limits<double>::quiet_NaN();  // ATM smile level at the optimum
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> sigma_times, sigma_values;  // calibrated VolCurve knots
    std::vector<ExpiryReport> expiries;
    OptimizerTrace trace;
    // echoed configuration
    double window = 30.0;
    double spread_threshold_bps = 20.0;

    ModelParams params() const;  // assembles the VolCurve; validates invariants
};

// One stage-3 observation: OTM quote mapped to ATM-normalized coordinates,
//   chi = x / (sigma_atm sqrt(t)),  c_mkt = price / (B0 sqrt(t) sigma_atm),
// puts converted to calls through parity. Exposed so the reported objective
// and MSE can be recomputed externally, bit for bit.
struct SmileQuoteObs {
    double chi = 0.0;
    double c_mkt = 0.0;
    double weight = 1.0;
    int expiry_index = -1;
};

std::vector<SmileQuoteObs> prepare_smile_quotes(const MarketChain& chain,
                                                const std::vector<DiscountForward>& dfs,
                                                const std::vector<AtmVolPoint>& atms,
                                                const SmileFitConfig& cfg);

// d(eta, k) = sum_i w_i [c_mkt_i - C(chi_i; eta, k)]^2 with
// C(chi) = E[cb(chi I0 + eta (G-1), sqrt(G))] / I0; exactly the quantity the
// optimizer minimizes.
double smile_objective(const std::vector<SmileQuoteObs>& quotes, double eta, double k,
                       Alpha alpha, std::vector<double>* squared_residuals = nullptr);

// Stage 3: least squares on ATM-normalized OTM prices across the included
// expiries, bounded Nelder-Mead on (eta, ln k) with deterministic
// multistarts.
CalibrationResult fit_smile(const MarketChain& chain,
                            const std::vector<DiscountForward>& dfs,
                            const std::vector<AtmVolPoint>& atms, const SmileFitConfig& cfg);

struct LevyTtmFit {
    std::string expiry;
    double t = 0.0;
    double eta = std::numeric_limits<double>::quiet_NaN();
    double k = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
    int quotes_used = 0;
    bool ok = false;
    std::string status;
};

// Per-expiry fits with the same objective restricted to one maturity; the
// resulting pairs carry no cross-maturity coherence guarantee.
std::vector<LevyTtmFit> fit_levy_fixed_ttm(const MarketChain& chain,
                                           const std::vector<DiscountForward>& dfs,
                                           const std::vector<AtmVolPoint>& atms,
                                           const SmileFitConfig& cfg);

// Stages 1-3 in order: discounts/forwards, first-expiry filter, ATM vols,
// smile fit. Stage outputs are frozen before the next stage runs.
CalibrationResult run_cascade(const MarketChain& chain, const OisCurve& ois,
                              const SmileFitConfig& cfg);

}  // namespace abach
