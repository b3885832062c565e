#include "abach/synth.hpp"

#include <cmath>
#include <random>

#include "abach/gdist.hpp"
#include "abach/marketio.hpp"
#include "abach/normal.hpp"
#include "abach/pricer.hpp"

namespace abach {

SynthMarket synth_market(const SynthConfig& cfg) {
    const size_t n = cfg.expiry_days.size();
    if (n == 0) throw InvalidInput("synthetic chain needs at least one expiry");
    if (cfg.sigma.size() != n)
        throw InvalidInput("one sigma knot per expiry: " + std::to_string(cfg.sigma.size()) +
                           " knots for " + std::to_string(n) + " expiries");
    for (size_t i = 0; i < n; ++i)
        if (cfg.expiry_days[i] <= (i ? cfg.expiry_days[i - 1] : 0))
            throw InvalidInput("expiry day offsets must be positive and strictly increasing");
    if (!(cfg.strike_step > 0.0) || !(cfg.strike_span >= cfg.strike_step))
        throw InvalidInput("strike grid needs 0 < step <= span");
    if (!(cfg.noise >= 0.0)) throw InvalidInput("noise must be >= 0");

    const Date vd = parse_date(cfg.value_date);

    std::vector<double> times(n);
    for (size_t i = 0; i < n; ++i) times[i] = cfg.expiry_days[i] / 365.0;
    ModelParams truth(VolCurve(times, cfg.sigma), cfg.eta, cfg.k, Alpha(cfg.alpha));

    // a handful of flat pillars bracketing the chain
    OisCurve ois({30.0 / 365.0, 0.5, 1.0, 2.0, 3.0},
                 std::vector<double>(5, cfg.rate));

    // strike grid as exact multiples of the step
    const long i_lo = std::lround(std::ceil((cfg.F0 - cfg.strike_span) / cfg.strike_step - 1e-9));
    const long i_hi = std::lround(std::floor((cfg.F0 + cfg.strike_span) / cfg.strike_step + 1e-9));

    std::mt19937_64 rng(cfg.seed);
    auto gauss = [&rng] {
        const double u = (rng() >> 11) * 0x1p-53 + 0x1p-54;
        return num::norm_ppf(u);
    };

    MarketChain chain;
    chain.value_date = format_date(vd);
    const GDistribution dist(truth.alpha, truth.k);
    for (size_t i = 0; i < n; ++i) {
        const double t = times[i];
        const double scale = truth.sigma.scale(t);
        const double r_i = cfg.rate + (i == 0 ? cfg.first_spread_bps * 1e-4 : 0.0);
        const double B0 = std::exp(-r_i * t);
        const GQuadrature quad =
            g_quadrature(dist, truth.eta, cfg.strike_span / scale + 1.0);

        ChainSlice slice;
        slice.expiry = format_date(vd + std::chrono::days{cfg.expiry_days[i]});
        slice.t = t;
        slice.rows.reserve(static_cast<size_t>(i_hi - i_lo + 1));
        for (long j = i_lo; j <= i_hi; ++j) {
            const double strike = static_cast<double>(j) * cfg.strike_step;
            const double x = strike - cfg.F0;
            double call = B0 * scale * mixture_call_normalized(x / scale, truth, quad);
            double put = call + B0 * x;  // exact parity before any noise
            if (cfg.noise > 0.0) {
                call *= 1.0 + cfg.noise * gauss();
                put *= 1.0 + cfg.noise * gauss();
            }
            slice.rows.push_back({strike, call, put});
        }
        chain.expiries.push_back(std::move(slice));
    }
    return SynthMarket{std::move(chain), std::move(ois), std::move(truth)};
}

}  // namespace abach
