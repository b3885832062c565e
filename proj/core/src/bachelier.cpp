#include "abach/bachelier.hpp"

#include <cmath>
#include <sstream>

#include "abach/normal.hpp"

namespace abach {

using namespace num;

namespace {

// Largest |y|/sigma the inverter is willing to resolve; beyond this the call
// time value is not representable in double precision anyway.
constexpr double MAX_TAIL_D = 37.0;

double cb_otm(double y, double sigma) {
    // y >= 0 branch
    if (y == 0.0) return sigma * INV_SQRT_2PI;
    const double d = y / sigma;
    if (d < 8.0) return -y * norm_cdf(-d) + sigma * norm_pdf(d);
    // cb = sigma phi(d) (1 - d Phi(-d)/phi(d)), last factor via the Mills
    // continued fraction to dodge the cancellation.
    return sigma * norm_pdf(d) * mills_tail_factor(d);
}

}  // namespace

double cb(double y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("cb requires sigma > 0");
    if (y < 0.0) return -y + cb_otm(-y, sigma);  // put-call parity
    return cb_otm(y, sigma);
}

double cb_time_value(double y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("cb_time_value requires sigma > 0");
    return cb_otm(std::fabs(y), sigma);
}

double log_cb_time_value(double y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("log_cb_time_value requires sigma > 0");
    const double ay = std::fabs(y);
    const double d = ay / sigma;
    if (d < 8.0) return std::log(cb_otm(ay, sigma));
    return std::log(sigma) + ln_norm_pdf(d) + std::log(mills_tail_factor(d));
}

Greeks greeks(double y, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("greeks require sigma > 0");
    const double d = y / sigma;
    const double pdf = norm_pdf(d);
    return {norm_cdf(-d), pdf, pdf / sigma, y / (sigma * sigma) * pdf};
}

double bachelier_call(double x, double t, double B0, double sigma_b) {
    if (!(t > 0.0)) throw InvalidInput("bachelier_call requires t > 0");
    if (!(B0 > 0.0)) throw InvalidInput("bachelier_call requires B0 > 0");
    const double st = std::sqrt(t);
    return B0 * st * cb(x / st, sigma_b);
}

double implied_vol_from_time_value(double abs_y, double tv) {
    if (!std::isfinite(tv) || !std::isfinite(abs_y))
        throw PriceNotFinite("time value or moneyness is not finite");
    if (!(tv > 0.0)) throw PriceBelowIntrinsic("time value must be strictly positive");
    if (abs_y < 0.0) throw InvalidInput("abs_y must be non-negative");
    if (abs_y == 0.0) return tv * SQRT_2PI;

    // cb(y, .) is strictly increasing with cb <= sigma/sqrt(2 pi), so
    // sigma >= tv sqrt(2 pi) always brackets from below.
    double lo = tv * SQRT_2PI;
    double hi = std::max(2.0 * lo, abs_y);
    for (int i = 0; i < 200 && cb_otm(abs_y, hi) < tv; ++i) hi *= 2.0;

    // Wing starting point: tv ~ sigma phi(d)/d^2 with d = |y|/sigma gives
    // d^2/2 + 3 log d = log(|y| / (tv sqrt(2 pi))).
    double sigma = lo;
    const double L = std::log(abs_y / (tv * SQRT_2PI));
    if (L > 2.0) {
        double d = std::sqrt(2.0 * std::max(L - 3.0 * std::log(std::sqrt(L)), 0.5));
        for (int it = 0; it < 4; ++it)
            d = std::sqrt(2.0 * std::max(L - 3.0 * std::log(d), 0.5));
        sigma = std::min(std::max(abs_y / d, lo), hi);
    } else {
        sigma = std::min(std::max(tv * SQRT_2PI + 0.3 * abs_y, lo), hi);
    }

    for (int it = 0; it < 200; ++it) {
        const double f = cb_otm(abs_y, sigma) - tv;
        if (f == 0.0) return sigma;
        if (f > 0.0)
            hi = sigma;
        else
            lo = sigma;
        if (hi - lo <= 1e-15 * sigma) break;
        const double vega = norm_pdf(abs_y / sigma);
        double next = (vega > 0.0) ? sigma - f / vega : 0.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        sigma = next;
    }

    if (abs_y / sigma > MAX_TAIL_D) {
        std::ostringstream os;
        os << "implied vol out of numeric range: |y|/sigma = " << abs_y / sigma << " exceeds "
           << MAX_TAIL_D;
        throw PriceBelowIntrinsic(os.str());
    }
    return sigma;
}

double implied_vol_normalized(double y, double p) {
    if (!std::isfinite(p)) throw PriceNotFinite("price is not finite");
    const double intrinsic = std::max(-y, 0.0);
    const double tv = p - intrinsic;
    if (!(tv > 0.0)) {
        std::ostringstream os;
        os << "price " << p << " does not exceed intrinsic value " << intrinsic;
        throw PriceBelowIntrinsic(os.str());
    }
    return implied_vol_from_time_value(std::fabs(y), tv);
}

double implied_vol(const Quote& q) {
    if (!(q.t > 0.0)) throw InvalidInput("quote needs t > 0");
    if (!(q.B0 > 0.0)) throw InvalidInput("quote needs B0 > 0");
    const double st = std::sqrt(q.t);
    return implied_vol_normalized(q.x / st, q.price / (q.B0 * st));
}

}  // namespace abach
