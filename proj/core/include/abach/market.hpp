#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abach/types.hpp"

namespace abach {

// One strike row of one expiry; missing sides are NaN.
struct CoupleRow {
    double strike = 0.0;
    double call_mid = std::numeric_limits<double>::quiet_NaN();
    double put_mid = std::numeric_limits<double>::quiet_NaN();

    bool has_call() const noexcept { return std::isfinite(call_mid); }
    bool has_put() const noexcept { return std::isfinite(put_mid); }
};

struct ChainSlice {
    std::string expiry;  // ISO date label
    double t = 0.0;      // ACT/365F year fraction from the value date
    std::vector<CoupleRow> rows;
};

struct MarketChain {
    std::string value_date;
    std::vector<ChainSlice> expiries;  // ascending in t
};

// Continuously compounded zero curve on year-fraction pillars; linear in the
// rate between pillars, flat outside.
class OisCurve {
public:
    OisCurve() = default;
    OisCurve(std::vector<double> times, std::vector<double> rates)
        : t_(std::move(times)), r_(std::move(rates)) {
        if (t_.size() != r_.size() || t_.empty())
            throw InvalidInput("OIS curve needs matching, nonempty pillars");
        for (size_t i = 1; i < t_.size(); ++i)
            if (!(t_[i] > t_[i - 1]))
                throw InvalidInput("OIS pillars must be strictly increasing");
    }

    bool empty() const noexcept { return t_.empty(); }

    double zero_rate(double t) const {
        if (empty()) throw MissingOisCurve("no OIS curve loaded");
        if (t <= t_.front()) return r_.front();
        if (t >= t_.back()) return r_.back();
        size_t i = 1;
        while (t_[i] < t) ++i;
        const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
        return r_[i - 1] + w * (r_[i] - r_[i - 1]);
    }

    double discount(double t) const { return std::exp(-zero_rate(t) * t); }

    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& rates() const noexcept { return r_; }

private:
    std::vector<double> t_, r_;
};

}  // namespace abach
