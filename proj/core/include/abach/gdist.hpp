#pragma once

#include <vector>

#include "abach/types.hpp"

namespace abach {

// Positive mixing variable G with E[G] = 1, Var[G] = k and Laplace transform
// E[exp(-uG)] = exp(psi(u; k, alpha)). Closed densities exist for the two
// families used throughout:
//   alpha = 0   -> gamma with shape 1/k, scale k
//   alpha = 1/2 -> inverse Gaussian with mean 1, shape 1/k
// The Bachelier limit G == 1 carries its own tag. Other alphas are accepted
// by the characteristic function but have no density here (UnsupportedAlpha).
class GDistribution {
public:
    GDistribution(Alpha alpha, double k);
    static GDistribution degenerate();

    bool is_degenerate() const noexcept { return degenerate_; }
    double k() const noexcept { return k_; }
    Alpha alpha() const noexcept { return alpha_; }

    double log_density(double g) const;
    double density(double g) const;
    double cdf(double g) const;
    // P(G > g) without forming 1 - cdf, so deep right tails keep relative
    // accuracy.
    double cdf_tail(double g) const;
    // Partial first moment E[G 1{G <= g}], in closed form per family.
    double partial_first_moment(double g) const;
    // E[G 1{G > g}], again stable in the right tail.
    double partial_first_moment_tail(double g) const;
    // E[exp(-u G)] for real u > -(1-alpha)/k.
    double laplace(double u) const;

private:
    GDistribution() : alpha_(0.5), k_(1.0), degenerate_(true) {}
    Alpha alpha_;
    double k_;
    bool degenerate_ = false;
};

// Fixed quadrature rule for expectations E[h(G)] ~ sum_i w_i h(g_i). The
// node layout adapts to the family: log-space Gauss-Legendre panels where the
// density is smooth, plus a geometrically graded head in the variable
// tau = g^(1/k) for the gamma family with shape < 2, whose density (and its
// derivatives) blow up at the origin. The envelope parameter Y widens the
// domain so integrands bounded by c (1 + Y + |eta|(g+1) + sqrt(g)) keep
// ~1e-13 relative accuracy.
struct GQuadrature {
    std::vector<double> g, w;

    double mass() const {
        double s = 0.0;
        for (double x : w) s += x;
        return s;
    }

    template <class F>
    double expect(F&& h) const {
        double s = 0.0;
        for (size_t i = 0; i < g.size(); ++i) s += w[i] * h(g[i]);
        return s;
    }
};

// nodes_per_panel trades accuracy for speed: 24 reaches ~1e-13, 12 is enough
// for calibration objectives (~1e-9).
GQuadrature g_quadrature(const GDistribution& dist, double eta, double Y,
                         int nodes_per_panel = 24);

}  // namespace abach
