#pragma once

#include "abach/types.hpp"

namespace abach {

// Normalized Bachelier call kernel cb(y, sigma) = E[(-sigma g - y)^+] with g
// standard normal:
//   cb(y, sigma) = -y Phi(-y/sigma) + sigma phi(y/sigma).
// Positive homogeneous of degree one and symmetric in time value:
// cb(-y, sigma) = y + cb(y, sigma).
double cb(double y, double sigma);

// Time value cb(|y|, sigma), i.e. cb stripped of intrinsic value.
double cb_time_value(double y, double sigma);

// log of the time value, usable far in the wings where the value itself
// underflows (|y|/sigma up to ~1e8).
double log_cb_time_value(double y, double sigma);

struct Greeks {
    double delta;  // dcb/d(-y) = Phi(-y/sigma)
    double vega;   // dcb/dsigma = phi(y/sigma)
    double gamma;  // phi(y/sigma)/sigma
    double vanna;  // (y/sigma^2) phi(y/sigma)
};
Greeks greeks(double y, double sigma);

// Undiscounted-forward call in price units, strike moneyness x = K - F0:
//   C = B0 sqrt(t) cb(x/sqrt(t), sigma_b).
double bachelier_call(double x, double t, double B0, double sigma_b);

struct Quote {
    double x;      // strike moneyness K - F0
    double t;      // year fraction to expiry
    double B0;     // discount factor
    double price;  // call mid price
};

// Bachelier implied volatility of a call quote. Throws PriceBelowIntrinsic /
// PriceNotFinite on unusable prices; quotes whose time value sits below the
// double-precision floor (|y|/sigma beyond ~37) are rejected as well.
double implied_vol(const Quote& q);

// Normalized variants: solve cb(y, sigma) = p, resp. cb(|y|, sigma) = tv.
double implied_vol_normalized(double y, double p);
double implied_vol_from_time_value(double abs_y, double tv);

}  // namespace abach
