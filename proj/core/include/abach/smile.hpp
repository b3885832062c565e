#pragma once

#include "abach/gdist.hpp"
#include "abach/types.hpp"

namespace abach {

// Implied Bachelier vol of the unit-scale variable z: I(y) solves
//   cb(y, I(y)) = E[(z - y)^+] .
// In price units the vol at strike moneyness x and maturity t is
// sigma_t I(x / (sigma_t sqrt(t))); the smile shape depends on (eta, k,
// alpha) alone.
//
// Evaluation canonicalizes eta to <= 0 through the mirror identity
// I(y; eta) = I(-y; -eta), which therefore holds bit-exactly.
class SmileFunction {
public:
    explicit SmileFunction(const ModelParams& p);

    double operator()(double y) const;    // I(y)
    double time_value(double y) const;    // E[(z-y)^+] - (-y)^+
    double price(double y) const;         // E[(z-y)^+]
    double atm_level() const;             // I(0)
    double normalized(double chi) const;  // I(chi I(0)) / I(0)

    const ModelParams& params() const noexcept { return p_; }

private:
    double tv_direct(double y) const;
    double tv_scan(double y) const;

    ModelParams p_;
    bool flip_;
    ModelParams canon_;  // p_ with eta mirrored to <= 0
    bool closed_ = false;
    GDistribution dist_;
    GQuadrature quad_;
    double atm_ = 1.0;
};

double smile_I(double y, const ModelParams& p);

struct SmileDerivatives {
    double level, slope, curvature;  // I, I', I'' at y
};
// Exact expectation formulas for the closed densities; central differences
// otherwise. Valid while y/I stays within pdf range (|y/I| < ~30).
SmileDerivatives smile_derivatives(double y, const ModelParams& p);

struct AtmExpansion {
    double level;      // I(0)
    double slope;      // I'(0)
    double curvature;  // I''(0); +inf for the gamma family with eta = 0, k >= 2
    bool by_finite_differences = false;
};
AtmExpansion atm_expansion(const ModelParams& p);
AtmExpansion atm_expansion_fd(const SmileFunction& smile, double h = 0.01);

// ATM skew in price units at maturity t: d/dx of the implied vol at x = 0,
// which is I'(0)/sqrt(t).
double atm_skew(const ModelParams& p, double t);

struct WingLimits {
    double left, right;  // lim I(y)^2 / |y| as y -> -inf resp. +inf
};
// 1/(2 p_plus) on the left wing, 1/(2 p_minus) on the right; zero in the
// Bachelier limit (flat smile).
WingLimits wing_limits(const ModelParams& p);

}  // namespace abach
