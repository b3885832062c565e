#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "abach/types.hpp"

namespace abach {

using cd = std::complex<double>;

// Laplace exponent of the positive mixing variable G (mean 1, variance k):
//   psi(u; k, alpha) = (1/k) ((1-alpha)/alpha) (1 - (1 + u k/(1-alpha))^alpha)
// with the alpha = 0 limit -(1/k) log(1 + u k). Principal branch; arguments
// that land on the cut (1 + u k/(1-alpha) real <= 0) are rejected.
cd psi(cd u, double k, double alpha);

// Log characteristic function of the unit-scale variable z with
// f_t = sigma_t sqrt(t) z in distribution:
//   log E[exp(i u z)] = psi(i u eta + u^2/2) + i u eta .
// The Bachelier limit returns -u^2/2. Im(u) must lie inside the
// moneyness-normalized analyticity strip (-p_minus, p_plus).
cd log_cf_z(cd u, const ModelParams& p);

// Log characteristic function of f_t at maturity t: log_cf_z(u sigma_t sqrt(t)).
cd log_cf(cd u, double t, const ModelParams& p);

// Same exponent with explicit per-maturity parameter values; used for
// time-dependent parametrizations such as the exponential-Levy benchmark.
cd log_cf_at(cd u, double t, double sigma_t, double eta_t, double k_t, Alpha alpha);

// Strip bounds p_{+/-} = -/+ eta + sqrt(eta^2 + 2(1-alpha)/k), both strictly
// positive for k > 0; infinite in the Bachelier limit. The _t fields divide
// by sigma_t sqrt(t).
StripBounds strip_bounds(double t, const ModelParams& p);
// Normalized bounds only (maturity independent).
StripBounds strip_bounds(const ModelParams& p);

struct AdditivityCheck {
    std::string name;
    bool applicable = true;
    bool passed = true;
    std::string detail;
};

struct AdditivityReport {
    std::vector<AdditivityCheck> checks;
    bool all_passed = true;
};

// Verifies, on a maturity grid, the sufficient conditions for the
// parametrization (sigma_t, eta_t, k_t, alpha) to define an additive
// martingale process: monotonicity in t of the strip bounds and of the
// auxiliary exponent scale, the small-t limits, and non-decreasing total
// variance. The conditions involving k_t^((1-alpha)/alpha) degenerate at
// alpha = 0 and are reported as not applicable there.
AdditivityReport validate_additivity(const VolCurve& sigma,
                                     const std::function<double(double)>& eta_curve,
                                     const std::function<double(double)>& k_curve,
                                     Alpha alpha, const std::vector<double>& grid);

// Constant-parameter convenience overload.
AdditivityReport validate_additivity(const ModelParams& p, const std::vector<double>& grid);

}  // namespace abach
