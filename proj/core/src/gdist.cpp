#include "abach/gdist.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "abach/chf.hpp"
#include "abach/normal.hpp"
#include "abach/quadrature.hpp"

namespace abach {

using num::norm_cdf;
using num::ln_norm_cdf;

GDistribution::GDistribution(Alpha alpha, double k) : alpha_(alpha), k_(k) {
    if (!(k > 0.0)) throw InvalidInput("GDistribution requires k > 0");
    if (!alpha.is_gamma() && !alpha.is_inverse_gaussian())
        throw UnsupportedAlpha("closed G density exists only for alpha in {0, 1/2}, got " +
                               std::to_string(alpha.value()));
}

GDistribution GDistribution::degenerate() { return GDistribution(); }

double GDistribution::log_density(double g) const {
    if (degenerate_) throw InvalidInput("degenerate G has no density");
    if (!(g > 0.0)) return -std::numeric_limits<double>::infinity();
    if (alpha_.is_gamma()) {
        const double a = 1.0 / k_;
        return (a - 1.0) * std::log(g) - g / k_ - std::lgamma(a) - a * std::log(k_);
    }
    const double lam = 1.0 / k_;
    const double d = g - 1.0;
    return 0.5 * (std::log(lam) - std::log(2.0 * M_PI) - 3.0 * std::log(g)) -
           lam * d * d / (2.0 * g);
}

double GDistribution::density(double g) const { return std::exp(log_density(g)); }

double GDistribution::cdf(double g) const {
    if (degenerate_) return g >= 1.0 ? 1.0 : 0.0;
    if (!(g > 0.0)) return 0.0;
    if (alpha_.is_gamma()) return boost::math::gamma_p(1.0 / k_, g / k_);
    const double lam = 1.0 / k_;
    const double s = std::sqrt(lam / g);
    // Phi(z1) + exp(2 lam) Phi(-z2), the second term assembled in logs since
    // exp(2 lam) alone overflows for small k.
    const double z1 = s * (g - 1.0), z2 = s * (g + 1.0);
    return norm_cdf(z1) + std::exp(2.0 * lam + ln_norm_cdf(-z2));
}

double GDistribution::cdf_tail(double g) const {
    if (degenerate_) return g >= 1.0 ? 0.0 : 1.0;
    if (!(g > 0.0)) return 1.0;
    if (alpha_.is_gamma()) return boost::math::gamma_q(1.0 / k_, g / k_);
    const double lam = 1.0 / k_;
    const double s = std::sqrt(lam / g);
    const double z1 = s * (g - 1.0), z2 = s * (g + 1.0);
    return norm_cdf(-z1) - std::exp(2.0 * lam + ln_norm_cdf(-z2));
}

double GDistribution::partial_first_moment(double g) const {
    if (degenerate_) return g >= 1.0 ? 1.0 : 0.0;
    if (!(g > 0.0)) return 0.0;
    if (alpha_.is_gamma()) {
        // E[G 1{G<=g}] = a k P(a+1, g/k) with a k = 1.
        return boost::math::gamma_p(1.0 / k_ + 1.0, g / k_);
    }
    const double lam = 1.0 / k_;
    const double s = std::sqrt(lam / g);
    const double z1 = s * (g - 1.0), z2 = s * (g + 1.0);
    return norm_cdf(z1) - std::exp(2.0 * lam + ln_norm_cdf(-z2));
}

double GDistribution::partial_first_moment_tail(double g) const {
    if (degenerate_) return g >= 1.0 ? 0.0 : 1.0;
    if (!(g > 0.0)) return 1.0;
    if (alpha_.is_gamma()) return boost::math::gamma_q(1.0 / k_ + 1.0, g / k_);
    const double lam = 1.0 / k_;
    const double s = std::sqrt(lam / g);
    const double z1 = s * (g - 1.0), z2 = s * (g + 1.0);
    return norm_cdf(-z1) + std::exp(2.0 * lam + ln_norm_cdf(-z2));
}

double GDistribution::laplace(double u) const {
    if (degenerate_) return std::exp(-u);
    return std::exp(psi(cd(u, 0.0), k_, alpha_.value()).real());
}

namespace {

constexpr double DROP = 62.0;  // log threshold for domain truncation

double envelope(const GDistribution& d, double s, double abs_eta, double Y) {
    const double g = std::exp(s);
    return d.log_density(g) + s + std::log(1.0 + Y + abs_eta * (g + 1.0) + std::sqrt(g));
}

// Scan log-space for the interval where the enveloped integrand is within
// DROP of its maximum.
void scan_domain(const GDistribution& d, double abs_eta, double Y, double& s_lo,
                 double& s_hi) {
    const double step = 0.25;
    double best = envelope(d, 0.0, abs_eta, Y);
    // expand right
    s_hi = 0.0;
    for (double x = step; x < 80.0; x += step) {
        const double e = envelope(d, x, abs_eta, Y);
        if (e > best) best = e;
        s_hi = x;
        if (e < best - DROP) break;
    }
    // expand left
    s_lo = 0.0;
    for (double x = -step; x > -700.0; x -= step) {
        const double e = envelope(d, x, abs_eta, Y);
        if (e > best) best = e;
        s_lo = x;
        if (e < best - DROP) break;
    }
}

void add_gl_panels_log(const GDistribution& d, double s_lo, double s_hi, double width,
                       int nodes, GQuadrature& q) {
    const auto& gl = num::gauss_legendre(nodes);
    const int np = std::max(1, static_cast<int>(std::ceil((s_hi - s_lo) / width)));
    const double w = (s_hi - s_lo) / np;
    for (int p = 0; p < np; ++p) {
        const double a = s_lo + p * w, c = a + 0.5 * w, h = 0.5 * w;
        for (size_t i = 0; i < gl.x.size(); ++i) {
            const double s = c + h * gl.x[i];
            const double g = std::exp(s);
            const double f = d.density(g) * g;  // log-space Jacobian
            if (f > 0.0) {
                q.g.push_back(g);
                q.w.push_back(gl.w[i] * h * f);
            }
        }
    }
}

}  // namespace

GQuadrature g_quadrature(const GDistribution& dist, double eta, double Y,
                         int nodes_per_panel) {
    GQuadrature q;
    if (dist.is_degenerate()) {
        q.g = {1.0};
        q.w = {1.0};
        return q;
    }
    const int nodes = std::clamp(nodes_per_panel, 6, 64);
    const double abs_eta = std::fabs(eta);
    const double k = dist.k();
    double s_lo = 0.0, s_hi = 0.0;
    scan_domain(dist, abs_eta, Y, s_lo, s_hi);

    if (dist.alpha().is_inverse_gaussian() || k <= 0.5) {
        const double width = std::min(0.5, std::max(0.12, 0.5 * std::sqrt(k)));
        add_gl_panels_log(dist, s_lo, s_hi, width, nodes, q);
        return q;
    }

    // Gamma with shape 1/k < 2: density (or its derivatives) is singular at
    // the origin. Integrate the head in tau = g^(1/k), where the gamma weight
    // g^(1/k - 1) dg = k dtau is flat, over geometrically graded panels so
    // integrable singularities of the integrand itself stay resolved.
    const double g_hi = std::exp(s_hi);
    const double g1 = std::min(1.0, 0.25 * g_hi);
    const double a = 1.0 / k;
    const double tau1 = std::pow(g1, a);
    // g^(a-1) dg / (Gamma(a) k^a) = k^(1-a)/Gamma(a) dtau
    const double norm = std::exp((1.0 - a) * std::log(k) - std::lgamma(a));
    const auto& gl = num::gauss_legendre(nodes);
    double lo = tau1 * 1e-30;
    while (lo < tau1) {
        const double hi = std::min(4.0 * lo, tau1);
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (size_t i = 0; i < gl.x.size(); ++i) {
            const double tau = c + h * gl.x[i];
            const double g = std::pow(tau, k);
            const double f = norm * std::exp(-g / k);
            q.g.push_back(g);
            q.w.push_back(gl.w[i] * h * f);
        }
        lo = hi;
    }
    if (g_hi > g1) add_gl_panels_log(dist, std::log(g1), s_hi, 0.5, nodes, q);
    return q;
}

}  // namespace abach
