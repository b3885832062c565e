#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace abach::num {

using cd = std::complex<double>;

struct GaussLegendre {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Nodes/weights for the n-point rule, computed on first use and cached.
const GaussLegendre& gauss_legendre(int n);

// Plain n-point Gauss-Legendre on [a, b].
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n = 20);

// Tanh-sinh (double exponential) quadrature on (a, b). Robust to integrable
// endpoint singularities of the integrand or its derivatives. Doubles the
// node density until two consecutive levels agree to `tol` relative to the
// running estimate. Non-finite integrand values (endpoint underflow) count
// as zero.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13, int max_level = 11);

// j_0..j_nmax spherical Bessel functions of the first kind at x >= 0.
void sph_bessel_array(int nmax, double x, double* out);

// One Filon-Legendre panel for oscillatory integrals
//   integral_a^b S(xi) exp(-i xi omega) dxi .
// The smooth factor S is projected on Legendre polynomials once; the
// oscillation is then integrated exactly for any frequency omega through
// spherical Bessel moments, so the panel width never needs to resolve the
// oscillation period.
class FilonPanel {
public:
    FilonPanel(const std::function<cd(double)>& S, double a, double b, int degree = 19);

    cd integral(double omega) const;

    // Magnitude proxy of the smooth factor on the panel (max |S| at nodes).
    double smooth_max() const noexcept { return smax_; }
    double left() const noexcept { return c_ - h_; }
    double right() const noexcept { return c_ + h_; }

private:
    double c_, h_, smax_;
    std::vector<cd> coeff_;  // Legendre coefficients of S on the panel
};

}  // namespace abach::num
