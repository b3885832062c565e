#include "abach/calib.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "abach/bachelier.hpp"
#include "abach/gdist.hpp"
#include "abach/normal.hpp"

namespace abach {

namespace {

constexpr double ATM_X_TOL = 1e-8;  // |K - F0| below this counts as the ATM quote

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

DiscountForward fit_discount_forward_slice(const ChainSlice& slice, const OisCurve* ois) {
    DiscountForward out;
    out.expiry = slice.expiry;
    out.t = slice.t;
    if (!(slice.t > 0.0)) throw InvalidInput("expiry " + slice.expiry + ": nonpositive maturity");

    double sk = 0.0, sd = 0.0;
    int n = 0;
    for (const auto& row : slice.rows) {
        if (!row.has_call() || !row.has_put()) continue;
        sk += row.strike;
        sd += row.call_mid - row.put_mid;
        ++n;
    }
    out.couples = n;
    if (n < 2) throw TooFewCouples("expiry " + slice.expiry + ": " + std::to_string(n) +
                                   " call/put couple(s), need 2");
    const double mk = sk / n, md = sd / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& row : slice.rows) {
        if (!row.has_call() || !row.has_put()) continue;
        const double dk = row.strike - mk;
        sxx += dk * dk;
        sxy += dk * (row.call_mid - row.put_mid - md);
    }
    if (!(sxx > 0.0))
        throw TooFewCouples("expiry " + slice.expiry + ": fewer than two distinct strikes");
    const double slope = sxy / sxx;
    if (!(slope < 0.0))
        throw NonPositiveDiscount("expiry " + slice.expiry +
                                  ": parity regression slope >= 0, implied discount unusable");
    const double intercept = md - slope * mk;
    out.B0 = -slope;
    out.F0 = intercept / out.B0;

    double max_res = 0.0;
    for (const auto& row : slice.rows) {
        if (!row.has_call() || !row.has_put()) continue;
        const double fitted = intercept + slope * row.strike;
        max_res = std::max(max_res, std::fabs(row.call_mid - row.put_mid - fitted));
    }
    out.max_parity_residual = max_res;

    if (ois != nullptr && !ois->empty()) {
        const double implied_rate = -std::log(out.B0) / slice.t;
        out.spread_bps = std::fabs(implied_rate - ois->zero_rate(slice.t)) * 1e4;
    }
    out.usable = true;
    out.status = "ok";
    return out;
}

std::vector<DiscountForward> fit_discount_forward(const MarketChain& chain,
                                                  const OisCurve* ois) {
    std::vector<DiscountForward> out;
    out.reserve(chain.expiries.size());
    double prev_t = 0.0;
    for (const auto& slice : chain.expiries) {
        if (!(slice.t > prev_t))
            throw InvalidInput("chain expiries must be strictly increasing in maturity");
        prev_t = slice.t;
        try {
            out.push_back(fit_discount_forward_slice(slice, ois));
        } catch (const Error& e) {
            DiscountForward bad;
            bad.expiry = slice.expiry;
            bad.t = slice.t;
            bad.usable = false;
            bad.status = std::string("excluded: ") + e.code();
            out.push_back(bad);
        }
    }
    return out;
}

std::vector<bool> filter_first_expiry(std::vector<DiscountForward>& curves,
                                      double threshold_bps) {
    std::vector<bool> mask(curves.size());
    for (size_t i = 0; i < curves.size(); ++i) mask[i] = curves[i].usable;
    if (!curves.empty() && curves.front().usable) {
        DiscountForward& first = curves.front();
        if (std::isnan(first.spread_bps))
            throw MissingOisCurve("first-expiry filter requires an OIS spread");
        if (first.spread_bps >= threshold_bps) {
            first.usable = false;
            first.status = "excluded: first-expiry OIS spread " + fmt(first.spread_bps) +
                           " bps >= " + fmt(threshold_bps) + " bps";
            mask.front() = false;
        }
    }
    return mask;
}

AtmVolPoint fit_atm_vol_slice(const ChainSlice& slice, const DiscountForward& df) {
    AtmVolPoint out;
    out.expiry = slice.expiry;
    out.t = slice.t;
    if (!df.usable) throw InvalidInput("expiry " + slice.expiry + ": no discount/forward fit");

    // exact ATM quote short-circuits the interpolation
    for (const auto& row : slice.rows) {
        const double x = row.strike - df.F0;
        if (std::fabs(x) <= ATM_X_TOL && (row.has_call() || row.has_put())) {
            const double call = row.has_call() ? row.call_mid : row.put_mid - df.B0 * x;
            out.sigma_atm = implied_vol(Quote{x, slice.t, df.B0, call});
            out.source_price = call;
            out.usable = true;
            out.status = "ok";
            return out;
        }
    }

    const CoupleRow* put_below = nullptr;
    const CoupleRow* call_above = nullptr;
    for (const auto& row : slice.rows) {
        const double x = row.strike - df.F0;
        if (x < -ATM_X_TOL && row.has_put()) {
            if (put_below == nullptr || row.strike > put_below->strike) put_below = &row;
        } else if (x > ATM_X_TOL && row.has_call()) {
            if (call_above == nullptr || row.strike < call_above->strike) call_above = &row;
        }
    }
    if (put_below == nullptr || call_above == nullptr)
        throw NoBracketingQuotes("expiry " + slice.expiry +
                                 ": no OTM quotes bracketing the forward");

    const double x_put = put_below->strike - df.F0;
    const double x_call = call_above->strike - df.F0;
    // puts enter as calls through parity, C = P - B0 x
    const double iv_put =
        implied_vol(Quote{x_put, slice.t, df.B0, put_below->put_mid - df.B0 * x_put});
    const double iv_call = implied_vol(Quote{x_call, slice.t, df.B0, call_above->call_mid});
    out.sigma_atm = iv_put + (0.0 - x_put) * (iv_call - iv_put) / (x_call - x_put);
    out.source_price = df.B0 * std::sqrt(slice.t) * out.sigma_atm * num::INV_SQRT_2PI;
    out.usable = true;
    out.status = "ok";
    return out;
}

std::vector<AtmVolPoint> fit_atm_vol(const MarketChain& chain,
                                     const std::vector<DiscountForward>& dfs) {
    if (dfs.size() != chain.expiries.size())
        throw InvalidInput("discount/forward rows do not match the chain");
    std::vector<AtmVolPoint> out;
    out.reserve(dfs.size());
    double prev_var = 0.0;
    bool have_prev = false;
    for (size_t i = 0; i < dfs.size(); ++i) {
        AtmVolPoint p;
        if (!dfs[i].usable) {
            p.expiry = chain.expiries[i].expiry;
            p.t = chain.expiries[i].t;
            p.status = dfs[i].status;
        } else {
            try {
                p = fit_atm_vol_slice(chain.expiries[i], dfs[i]);
            } catch (const Error& e) {
                p.expiry = chain.expiries[i].expiry;
                p.t = chain.expiries[i].t;
                p.usable = false;
                p.status = std::string("excluded: ") + e.code();
            }
        }
        if (p.usable) {
            const double var = p.sigma_atm * p.sigma_atm * p.t;
            if (have_prev && var < prev_var) p.variance_decreasing = true;
            prev_var = var;
            have_prev = true;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<SmileQuoteObs> prepare_smile_quotes(const MarketChain& chain,
                                                const std::vector<DiscountForward>& dfs,
                                                const std::vector<AtmVolPoint>& atms,
                                                const SmileFitConfig& cfg) {
    if (dfs.size() != chain.expiries.size() || atms.size() != chain.expiries.size())
        throw InvalidInput("stage outputs do not match the chain");
    std::vector<SmileQuoteObs> quotes;
    for (size_t i = 0; i < chain.expiries.size(); ++i) {
        if (!dfs[i].usable || !atms[i].usable) continue;
        const ChainSlice& slice = chain.expiries[i];
        const double B0 = dfs[i].B0, F0 = dfs[i].F0;
        const double denom = atms[i].sigma_atm * std::sqrt(slice.t);
        for (const auto& row : slice.rows) {
            const double x = row.strike - F0;
            if (std::fabs(x) > cfg.window * (1.0 + 1e-12)) continue;
            double call;
            if (x > ATM_X_TOL) {  // OTM call side
                if (!row.has_call()) continue;
                call = row.call_mid;
            } else if (x < -ATM_X_TOL) {  // OTM put side, converted via parity
                if (!row.has_put()) continue;
                call = row.put_mid - B0 * x;
            } else {  // ATM: zero residual by construction, kept for MSE bookkeeping
                if (row.has_call())
                    call = row.call_mid;
                else if (row.has_put())
                    call = row.put_mid - B0 * x;
                else
                    continue;
            }
            if (!std::isfinite(call) || call <= 0.0) continue;
            SmileQuoteObs q;
            q.chi = x / denom;
            q.c_mkt = call / (B0 * denom);
            q.weight = cfg.vega_weighted ? num::norm_pdf(q.chi) : 1.0;
            q.expiry_index = static_cast<int>(i);
            quotes.push_back(q);
        }
    }
    return quotes;
}

double smile_objective(const std::vector<SmileQuoteObs>& quotes, double eta, double k,
                       Alpha alpha, std::vector<double>* squared_residuals) {
    if (quotes.empty()) throw EmptyQuoteSet("no quotes to fit");
    double chi_max = 0.0;
    for (const auto& q : quotes) chi_max = std::max(chi_max, std::fabs(q.chi));

    const GDistribution dist(alpha, k);
    const double reach = 8.0 + chi_max * (2.0 + 2.5 * std::fabs(eta) * std::sqrt(k));
    const GQuadrature gq = g_quadrature(dist, eta, reach, 12);

    const double i0 =
        num::SQRT_2PI * gq.expect([&](double g) { return cb(eta * (g - 1.0), std::sqrt(g)); });

    // accumulate model prices node-major so sqrt(g) is hoisted out of the
    // quote loop
    std::vector<double> model(quotes.size(), 0.0);
    for (size_t j = 0; j < gq.g.size(); ++j) {
        const double g = gq.g[j], w = gq.w[j];
        const double sq = std::sqrt(g);
        const double shift = eta * (g - 1.0);
        for (size_t i = 0; i < quotes.size(); ++i)
            model[i] += w * cb(quotes[i].chi * i0 + shift, sq);
    }

    if (squared_residuals) squared_residuals->assign(quotes.size(), 0.0);
    double obj = 0.0;
    for (size_t i = 0; i < quotes.size(); ++i) {
        const double r = quotes[i].c_mkt - model[i] / i0;
        if (squared_residuals) (*squared_residuals)[i] = r * r;
        obj += quotes[i].weight * r * r;
    }
    return obj;
}

namespace {

struct NmVertex {
    double x = 0.0, y = 0.0, f = 0.0;
};

struct NmOutcome {
    double x = 0.0, y = 0.0, f = 0.0;
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
};

// Bounded Nelder-Mead in 2-D: candidate points are projected onto the box
// before evaluation, so the simplex never leaves it.
template <class F>
NmOutcome nelder_mead_2d(F&& f, double x0, double y0, double step, const double lo[2],
                         const double hi[2], double tol, int max_iter) {
    long evals = 0;
    auto eval = [&](double x, double y) {
        ++evals;
        return f(x, y);
    };
    auto clamp_pt = [&](double& x, double& y) {
        x = std::clamp(x, lo[0], hi[0]);
        y = std::clamp(y, lo[1], hi[1]);
    };

    std::array<NmVertex, 3> s;
    double xs[3] = {x0, x0 + step, x0};
    double ys[3] = {y0, y0, y0 + step};
    for (int i = 0; i < 3; ++i) {
        clamp_pt(xs[i], ys[i]);
        s[i] = {xs[i], ys[i], eval(xs[i], ys[i])};
    }
    // degenerate start on a box corner: nudge inward
    if (s[0].x == s[1].x && s[0].y == s[1].y) {
        s[1].x = std::clamp(x0 - step, lo[0], hi[0]);
        s[1].f = eval(s[1].x, s[1].y);
    }
    if (s[0].x == s[2].x && s[0].y == s[2].y) {
        s[2].y = std::clamp(y0 - step, lo[1], hi[1]);
        s[2].f = eval(s[2].x, s[2].y);
    }

    auto by_f = [](const NmVertex& a, const NmVertex& b) { return a.f < b.f; };
    std::sort(s.begin(), s.end(), by_f);

    NmOutcome out;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double diam = std::max({std::fabs(s[0].x - s[1].x), std::fabs(s[0].x - s[2].x),
                                      std::fabs(s[1].x - s[2].x), std::fabs(s[0].y - s[1].y),
                                      std::fabs(s[0].y - s[2].y), std::fabs(s[1].y - s[2].y)});
        if (diam < tol) {
            out.converged = true;
            break;
        }
        const double cx = 0.5 * (s[0].x + s[1].x), cy = 0.5 * (s[0].y + s[1].y);
        double rx = cx + (cx - s[2].x), ry = cy + (cy - s[2].y);
        clamp_pt(rx, ry);
        const double fr = eval(rx, ry);
        if (fr < s[0].f) {
            double ex = cx + 2.0 * (cx - s[2].x), ey = cy + 2.0 * (cy - s[2].y);
            clamp_pt(ex, ey);
            const double fe = eval(ex, ey);
            s[2] = fe < fr ? NmVertex{ex, ey, fe} : NmVertex{rx, ry, fr};
        } else if (fr < s[1].f) {
            s[2] = {rx, ry, fr};
        } else {
            // contraction: outside toward the reflected point when it improved
            // on the worst vertex, inside otherwise
            double px, py;
            if (fr < s[2].f) {
                px = cx + 0.5 * (rx - cx);
                py = cy + 0.5 * (ry - cy);
            } else {
                px = cx - 0.5 * (cx - s[2].x);
                py = cy - 0.5 * (cy - s[2].y);
            }
            clamp_pt(px, py);
            const double fp = eval(px, py);
            if (fp < std::min(fr, s[2].f)) {
                s[2] = {px, py, fp};
            } else {  // shrink toward the best vertex
                for (int i = 1; i < 3; ++i) {
                    s[i].x = s[0].x + 0.5 * (s[i].x - s[0].x);
                    s[i].y = s[0].y + 0.5 * (s[i].y - s[0].y);
                    s[i].f = eval(s[i].x, s[i].y);
                }
            }
        }
        std::sort(s.begin(), s.end(), by_f);
    }
    out.x = s[0].x;
    out.y = s[0].y;
    out.f = s[0].f;
    out.iterations = it;
    out.evaluations = evals;
    return out;
}

// Deterministic multistart lattice over the projection box.
std::vector<std::pair<double, double>> start_lattice(const SmileFitConfig& cfg) {
    const int n = std::max(1, cfg.multistarts);
    const int nx = std::max(1, static_cast<int>(std::ceil(std::sqrt(2.0 * n))));
    const int ny = std::max(1, (n + nx - 1) / nx);
    std::vector<std::pair<double, double>> starts;
    for (int j = 0; j < ny && static_cast<int>(starts.size()) < n; ++j)
        for (int i = 0; i < nx && static_cast<int>(starts.size()) < n; ++i)
            starts.emplace_back(cfg.eta_lo + (i + 0.5) * (cfg.eta_hi - cfg.eta_lo) / nx,
                                cfg.lnk_lo + (j + 0.5) * (cfg.lnk_hi - cfg.lnk_lo) / ny);
    return starts;
}

struct FitCore {
    double eta = 0.0, k = 1.0, objective = 0.0;
    OptimizerTrace trace;
};

FitCore optimize_smile(const std::vector<SmileQuoteObs>& quotes, const SmileFitConfig& cfg) {
    auto f = [&](double eta, double lnk) {
        return smile_objective(quotes, eta, std::exp(lnk), cfg.alpha);
    };
    const double lo[2] = {cfg.eta_lo, cfg.lnk_lo};
    const double hi[2] = {cfg.eta_hi, cfg.lnk_hi};

    FitCore out;
    NmOutcome best;
    bool have_best = false;
    for (const auto& [e0, l0] : start_lattice(cfg)) {
        const NmOutcome r =
            nelder_mead_2d(f, e0, l0, 0.25, lo, hi, cfg.simplex_tol, cfg.max_iterations);
        out.trace.evaluations += static_cast<int>(r.evaluations);
        out.trace.iterations += r.iterations;
        out.trace.starts.push_back({r.x, std::exp(r.y), r.f});
        if (r.converged && (!have_best || r.f < best.f)) {
            best = r;
            have_best = true;
        }
    }
    if (!have_best)
        throw OptimizerNotConverged("no multistart reached simplex diameter " +
                                    fmt(cfg.simplex_tol) + " within " +
                                    std::to_string(cfg.max_iterations) + " iterations");
    out.trace.converged = true;
    const double btol = 10.0 * cfg.simplex_tol;
    out.trace.at_bound = std::fabs(best.x - cfg.eta_lo) < btol ||
                         std::fabs(best.x - cfg.eta_hi) < btol ||
                         std::fabs(best.y - cfg.lnk_lo) < btol ||
                         std::fabs(best.y - cfg.lnk_hi) < btol;
    out.eta = best.x;
    out.k = std::exp(best.y);
    out.objective = best.f;
    return out;
}

}  // namespace

CalibrationResult fit_smile(const MarketChain& chain, const std::vector<DiscountForward>& dfs,
                            const std::vector<AtmVolPoint>& atms, const SmileFitConfig& cfg) {
    const std::vector<SmileQuoteObs> quotes = prepare_smile_quotes(chain, dfs, atms, cfg);
    if (quotes.empty()) throw EmptyQuoteSet("no OTM quotes inside the moneyness window");

    const FitCore fit = optimize_smile(quotes, cfg);

    CalibrationResult res;
    res.value_date = chain.value_date;
    res.eta = fit.eta;
    res.k = fit.k;
    res.alpha = cfg.alpha.value();
    res.trace = fit.trace;
    res.window = cfg.window;
    res.spread_threshold_bps = cfg.spread_threshold_bps;

    std::vector<double> sq;
    res.objective = smile_objective(quotes, fit.eta, fit.k, cfg.alpha, &sq);

    // ATM smile level at the optimum fixes the vol curve: sigma_t = sigma_atm/I0
    const GDistribution dist(cfg.alpha, fit.k);
    const GQuadrature gq = g_quadrature(dist, fit.eta, 8.0);
    res.i0 = num::SQRT_2PI *
             gq.expect([&](double g) { return cb(fit.eta * (g - 1.0), std::sqrt(g)); });

    std::vector<double> sum_sq(chain.expiries.size(), 0.0);
    std::vector<int> n_quotes(chain.expiries.size(), 0);
    for (size_t i = 0; i < quotes.size(); ++i) {
        sum_sq[quotes[i].expiry_index] += sq[i];
        n_quotes[quotes[i].expiry_index] += 1;
    }

    for (size_t i = 0; i < chain.expiries.size(); ++i) {
        ExpiryReport rep;
        rep.expiry = chain.expiries[i].expiry;
        rep.t = chain.expiries[i].t;
        rep.df = dfs[i];
        rep.included = dfs[i].usable && atms[i].usable && n_quotes[i] > 0;
        if (atms[i].usable) rep.sigma_atm = atms[i].sigma_atm;
        if (rep.included) {
            rep.sigma_model = atms[i].sigma_atm / res.i0;
            rep.quotes_used = n_quotes[i];
            rep.mse = sum_sq[i] / n_quotes[i];
            rep.status = "ok";
            res.sigma_times.push_back(rep.t);
            res.sigma_values.push_back(rep.sigma_model);
        } else {
            rep.status = !dfs[i].usable  ? dfs[i].status
                         : !atms[i].usable ? atms[i].status
                                           : "excluded: no quotes inside the window";
        }
        res.expiries.push_back(std::move(rep));
    }
    return res;
}

ModelParams CalibrationResult::params() const {
    if (sigma_times.empty())
        throw InvalidInput("calibration produced no usable expiries");
    return ModelParams(VolCurve(sigma_times, sigma_values), eta, k, Alpha(alpha));
}

std::vector<LevyTtmFit> fit_levy_fixed_ttm(const MarketChain& chain,
                                           const std::vector<DiscountForward>& dfs,
                                           const std::vector<AtmVolPoint>& atms,
                                           const SmileFitConfig& cfg) {
    const std::vector<SmileQuoteObs> all = prepare_smile_quotes(chain, dfs, atms, cfg);
    std::vector<LevyTtmFit> out;
    for (size_t i = 0; i < chain.expiries.size(); ++i) {
        LevyTtmFit fit;
        fit.expiry = chain.expiries[i].expiry;
        fit.t = chain.expiries[i].t;
        std::vector<SmileQuoteObs> quotes;
        for (const auto& q : all)
            if (q.expiry_index == static_cast<int>(i)) quotes.push_back(q);
        if (quotes.empty()) {
            fit.status = !dfs[i].usable  ? dfs[i].status
                         : !atms[i].usable ? atms[i].status
                                           : "excluded: no quotes inside the window";
            out.push_back(std::move(fit));
            continue;
        }
        try {
            const FitCore core = optimize_smile(quotes, cfg);
            fit.eta = core.eta;
            fit.k = core.k;
            fit.mse = core.objective / quotes.size();
            fit.quotes_used = static_cast<int>(quotes.size());
            fit.ok = true;
            fit.status = "ok";
        } catch (const Error& e) {
            fit.status = std::string("failed: ") + e.code();
        }
        out.push_back(std::move(fit));
    }
    return out;
}

CalibrationResult run_cascade(const MarketChain& chain, const OisCurve& ois,
                              const SmileFitConfig& cfg) {
    std::vector<DiscountForward> dfs = fit_discount_forward(chain, &ois);
    filter_first_expiry(dfs, cfg.spread_threshold_bps);
    const std::vector<AtmVolPoint> atms = fit_atm_vol(chain, dfs);
    return fit_smile(chain, dfs, atms, cfg);
}

}  // namespace abach
