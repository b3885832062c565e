#include "abach/smile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "abach/bachelier.hpp"
#include "abach/chf.hpp"
#include "abach/normal.hpp"
#include "abach/pricer.hpp"
#include "abach/quadrature.hpp"

namespace abach {

namespace {

constexpr double DIRECT_CUTOFF = 6.0;  // |y| beyond which the log-space path runs

ModelParams mirrored(const ModelParams& p, bool flip) {
    if (!flip) return p;
    return ModelParams(p.sigma, -p.eta, p.k, p.alpha);
}

// A(y) = E[(-m(G))^+] - (-y)^+ with m(g) = y + eta (g - 1): the gap between
// the averaged intrinsic part of the mixture and the option's own intrinsic
// value. Nonzero only while the kink g0 = 1 - y/eta lies inside the support,
// and expressible through partial first moments:
//   A = |eta| E[(G - g0)^+]   (g0 >= 1)
//   A = |eta| E[(g0 - G)^+]   (g0 < 1).
double kink_correction(double y, double eta, const GDistribution& dist) {
    if (dist.is_degenerate() || eta == 0.0) return 0.0;
    const double g0 = 1.0 - y / eta;
    if (!(g0 > 0.0)) return 0.0;
    double q;
    if (g0 >= 1.0)
        q = dist.partial_first_moment_tail(g0) - g0 * dist.cdf_tail(g0);
    else
        q = g0 * dist.cdf(g0) - dist.partial_first_moment(g0);
    return std::fabs(eta) * std::max(q, 0.0);
}

}  // namespace

SmileFunction::SmileFunction(const ModelParams& p)
    : p_(p),
      flip_(!p.bachelier_limit && p.eta > 0.0),
      canon_(mirrored(p, flip_)),
      dist_(GDistribution::degenerate()) {
    if (p_.bachelier_limit) {
        closed_ = true;
        quad_ = g_quadrature(dist_, 0.0, 8.0);
        atm_ = 1.0;
        return;
    }
    closed_ = p_.alpha.is_gamma() || p_.alpha.is_inverse_gaussian();
    if (closed_) {
        dist_ = GDistribution(p_.alpha, p_.k);
        quad_ = g_quadrature(dist_, canon_.eta, 8.0);
    }
    atm_ = implied_vol_from_time_value(0.0, time_value(0.0));
}

double SmileFunction::time_value(double y) const {
    if (!std::isfinite(y)) throw InvalidInput("moneyness must be finite");
    if (p_.bachelier_limit) return cb_time_value(y, 1.0);
    double yc = flip_ ? -y : y;
    if (canon_.eta == 0.0) yc = std::fabs(yc);  // even smile, canonical side
    if (!closed_) {
        const double price = lewis_call_normalized(yc, canon_);
        const double tv = price - std::max(-yc, 0.0);
        if (!(tv > 0.0))
            throw PriceBelowIntrinsic("time value below quadrature resolution at y = " +
                                      std::to_string(y));
        return tv;
    }
    return std::fabs(yc) <= DIRECT_CUTOFF ? tv_direct(yc) : tv_scan(yc);
}

double SmileFunction::tv_direct(double y) const {
    const double eta = canon_.eta;
    const double price =
        quad_.expect([&](double g) { return cb(y + eta * (g - 1.0), std::sqrt(g)); });
    const double tv = price - std::max(-y, 0.0);
    if (!(tv > 0.0))
        throw PriceBelowIntrinsic("time value vanished at y = " + std::to_string(y));
    return tv;
}

// Deep wings: integrate the time value itself in s = log g so nothing is
// ever subtracted from the intrinsic part; the kink correction restores the
// averaged-vs-pointwise intrinsic gap exactly.
double SmileFunction::tv_scan(double y) const {
    const double eta = canon_.eta;
    auto log_integrand = [&](double s) {
        const double g = std::exp(s);
        const double m = y + eta * (g - 1.0);
        return log_cb_time_value(m, std::sqrt(g)) + dist_.log_density(g) + s;
    };

    const double s_min = -46.0, s_max = 9.0, step = 0.15;
    const int n = static_cast<int>((s_max - s_min) / step) + 1;
    std::vector<double> val(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        val[i] = log_integrand(s_min + i * step);
        peak = std::max(peak, val[i]);
    }
    const double correction = kink_correction(y, eta, dist_);
    if (!std::isfinite(peak) || peak < -700.0) {
        if (!(correction > 0.0))
            throw PriceBelowIntrinsic("time value underflows at y = " + std::to_string(y));
        return correction;
    }

    int first = 0, last = n - 1;
    while (first < n && val[first] < peak - 55.0) ++first;
    while (last > 0 && val[last] < peak - 55.0) --last;
    double w_lo = std::max(s_min, s_min + (first - 1) * step);
    double w_hi = std::min(s_max, s_min + (last + 1) * step);

    // panel boundaries, splitting at the kink so every panel sees a smooth
    // integrand
    std::vector<double> edges{w_lo};
    if (eta != 0.0) {
        const double g0 = 1.0 - y / eta;
        if (g0 > 0.0) {
            const double s0 = std::log(g0);
            if (s0 > w_lo && s0 < w_hi) edges.push_back(s0);
        }
    }
    edges.push_back(w_hi);

    const auto& gl = num::gauss_legendre(24);
    double acc = 0.0;
    for (size_t e = 0; e + 1 < edges.size(); ++e) {
        const int np = std::max(1, static_cast<int>(std::ceil((edges[e + 1] - edges[e]) / 0.3)));
        const double w = (edges[e + 1] - edges[e]) / np;
        for (int panel = 0; panel < np; ++panel) {
            const double c = edges[e] + (panel + 0.5) * w, h = 0.5 * w;
            for (size_t i = 0; i < gl.x.size(); ++i) {
                const double l = log_integrand(c + h * gl.x[i]);
                if (std::isfinite(l)) acc += gl.w[i] * h * std::exp(l - peak);
            }
        }
    }
    return std::exp(peak) * acc + correction;
}

double SmileFunction::operator()(double y) const {
    if (p_.bachelier_limit) return 1.0;
    return implied_vol_from_time_value(std::fabs(y), time_value(y));
}

double SmileFunction::price(double y) const {
    if (p_.bachelier_limit) return cb(y, 1.0);
    return time_value(y) + std::max(-y, 0.0);
}

double SmileFunction::atm_level() const { return atm_; }

double SmileFunction::normalized(double chi) const { return (*this)(chi * atm_) / atm_; }

double smile_I(double y, const ModelParams& p) { return SmileFunction(p)(y); }

SmileDerivatives smile_derivatives(double y, const ModelParams& p) {
    if (p.bachelier_limit) return {1.0, 0.0, 0.0};
    SmileFunction smile(p);
    const double level = smile(y);
    if (!p.alpha.is_gamma() && !p.alpha.is_inverse_gaussian()) {
        const double h = 1e-3;
        const double up = smile(y + h), dn = smile(y - h);
        return {level, (up - dn) / (2.0 * h), (up - 2.0 * level + dn) / (h * h)};
    }
    GDistribution dist(p.alpha, p.k);
    const GQuadrature quad = g_quadrature(dist, p.eta, std::max(8.0, std::fabs(y) + 2.0));
    const double eta = p.eta;
    const double d = y / level;
    const double pdf_d = num::norm_pdf(d);
    if (pdf_d == 0.0) throw PriceNotFinite("smile derivatives unavailable this deep in the wing");
    // C'(y) = -E[Phi(-m/sqrt(G))] and C(y) = cb(y, I(y)) give
    //   I' = (Phi(-d) - E[Phi(-m/sqrt(G))]) / phi(d),
    //   I'' = E[phi(m/sqrt(G))/sqrt(G)] / phi(d) - (1 - d I')^2 / I .
    const double mean_delta = quad.expect(
        [&](double g) { return num::norm_cdf(-(y + eta * (g - 1.0)) / std::sqrt(g)); });
    const double slope = (num::norm_cdf(-d) - mean_delta) / pdf_d;
    const double mean_density = quad.expect(
        [&](double g) { return num::norm_pdf((y + eta * (g - 1.0)) / std::sqrt(g)) / std::sqrt(g); });
    const double c = 1.0 - d * slope;
    const double curvature = mean_density / pdf_d - c * c / level;
    return {level, slope, curvature};
}

AtmExpansion atm_expansion(const ModelParams& p) {
    if (p.bachelier_limit) return {1.0, 0.0, 0.0, false};
    if (!p.alpha.is_gamma() && !p.alpha.is_inverse_gaussian())
        return atm_expansion_fd(SmileFunction(p));
    GDistribution dist(p.alpha, p.k);
    const GQuadrature quad = g_quadrature(dist, p.eta, 8.0);
    const double eta = p.eta;
    const double level =
        num::SQRT_2PI * quad.expect([&](double g) { return cb(eta * (g - 1.0), std::sqrt(g)); });
    const double slope = -std::sqrt(M_PI / 2.0) * quad.expect([&](double g) {
        return std::erf(eta * (1.0 - g) / (num::SQRT_2 * std::sqrt(g)));
    });
    double curvature;
    if (p.alpha.is_gamma() && eta == 0.0 && p.k >= 2.0) {
        // E[G^(-1/2)] diverges: the ATM curvature is infinite even though the
        // smile itself stays finite off the money.
        curvature = std::numeric_limits<double>::infinity();
    } else {
        curvature = num::SQRT_2PI * quad.expect([&](double g) {
                        return num::norm_pdf(eta * (1.0 - g) / std::sqrt(g)) / std::sqrt(g);
                    }) -
                    1.0 / level;
    }
    return {level, slope, curvature, false};
}

AtmExpansion atm_expansion_fd(const SmileFunction& smile, double h) {
    if (!(h > 0.0)) throw InvalidInput("finite-difference step must be positive");
    const double i0 = smile.atm_level();
    const double p1 = smile(h), m1 = smile(-h), p2 = smile(2.0 * h), m2 = smile(-2.0 * h);
    const double slope = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    const double curvature = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * i0) / (12.0 * h * h);
    return {i0, slope, curvature, true};
}

double atm_skew(const ModelParams& p, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("maturity must be positive");
    return atm_expansion(p).slope / std::sqrt(t);
}

WingLimits wing_limits(const ModelParams& p) {
    if (p.bachelier_limit) return {0.0, 0.0};
    const StripBounds sb = strip_bounds(p);
    return {0.5 / sb.p_plus, 0.5 / sb.p_minus};
}

}  // namespace abach
