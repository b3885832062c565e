#pragma once

#include <optional>

#include "abach/chf.hpp"
#include "abach/gdist.hpp"
#include "abach/types.hpp"

namespace abach {

struct QuadratureConfig {
    // Lewis contour shift in moneyness-normalized units; must lie inside
    // (-p_minus, p_plus) and away from 0. Unset selects -p_minus/2 for
    // OTM-side strikes and +p_plus/2 ITM-side, which keeps the damping factor
    // exp(y a) <= 1 on both sides.
    std::optional<double> contour_a;
    double tolerance = 1e-11;  // absolute, in normalized price units
    double xi_max = 1e9;       // hard cap on the Fourier domain
    int filon_degree = 19;     // Legendre degree per oscillatory panel
};

// Call on the unit-scale variable z, E[(z - y)^+], through the Lewis contour
// integral of the characteristic function. Works for every alpha in [0,1).
double lewis_call_normalized(double y, const ModelParams& p, const QuadratureConfig& cfg = {});

// Price units: C(x,t) = B0 sigma_t sqrt(t) E[(z - y)^+], y = x/(sigma_t sqrt(t)).
double lewis_call(double x, double t, double B0, const ModelParams& p,
                  const QuadratureConfig& cfg = {});

// Same price as a mixture of Bachelier kernels over G:
//   E[(z - y)^+] = E[ cb(y + eta(G-1), sqrt(G)) ].
// Requires a closed G density (alpha in {0, 1/2}) or the Bachelier limit.
double mixture_call_normalized(double y, const ModelParams& p);
double mixture_call_normalized(double y, const ModelParams& p, const GQuadrature& q);
double mixture_call(double x, double t, double B0, const ModelParams& p);

// Exponential-additive reduction of the time-homogeneous Levy benchmark:
// sigma_t = sigma_hat, eta_t = eta_hat sqrt(t), k_t = k_hat / t reproduce the
// Levy log characteristic function, linear in t.
struct LevyCurves {
    double sigma_hat, eta_hat, k_hat;
    Alpha alpha;

    double sigma(double t) const { return sigma_hat; }
    double eta(double t) const { return eta_hat * std::sqrt(t); }
    double k(double t) const { return k_hat / t; }
    cd log_cf(cd u, double t) const {
        return log_cf_at(u, t, sigma(t), eta(t), k(t), alpha);
    }
};

LevyCurves levy_benchmark_params(double sigma_hat, double eta_hat, double k_hat, Alpha alpha);

}  // namespace abach
