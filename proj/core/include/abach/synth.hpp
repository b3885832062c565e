#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abach/market.hpp"
#include "abach/types.hpp"

namespace abach {

// Recipe for a synthetic option chain: model-consistent, parity-exact
// call/put mids on a fixed strike grid around the forward, plus a flat OIS
// curve. The first expiry can be made to fund away from OIS, and mids can be
// perturbed by multiplicative noise from a fixed seed.
struct SynthConfig {
    std::string value_date = "2020-04-29";
    // expiries as day offsets from the value date (year fractions = days/365)
    std::vector<int> expiry_days = {44, 75, 105, 136, 167, 259, 350, 533, 715};
    // vol knots, one per expiry, in price units per sqrt(year)
    std::vector<double> sigma = {15.0, 14.0, 13.2, 12.6, 12.1, 11.2, 10.6, 9.9, 9.5};
    double eta = -0.6;
    double k = 1.1;
    double alpha = 0.5;

    // Keep F0 a grid multiple so the chain carries an exact at-the-money row.
    double F0 = 40.0;
    double rate = 0.01;  // flat continuously compounded OIS zero rate
    double strike_step = 0.5;
    double strike_span = 35.0;  // grid covers [F0 - span, F0 + span]

    double noise = 0.0;  // multiplicative mid perturbation, e.g. 0.005 = 0.5%
    std::uint64_t seed = 20200429;
    double first_spread_bps = 0.0;  // first-expiry funding offset against OIS
};

struct SynthMarket {
    MarketChain chain;
    OisCurve ois;
    ModelParams truth;
};

SynthMarket synth_market(const SynthConfig& cfg);

}  // namespace abach
