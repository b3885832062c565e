#include "abach/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "abach/bachelier.hpp"
#include "abach/quadrature.hpp"

namespace abach {

namespace {

double pick_contour(double y, const StripBounds& sb, const ModelParams& p,
                    const QuadratureConfig& cfg) {
    if (cfg.contour_a) {
        const double a = *cfg.contour_a;
        if (!std::isfinite(a) || a == 0.0)
            throw InvalidInput("contour shift must be finite and nonzero");
        if (a <= -sb.p_minus || a >= sb.p_plus)
            throw OutsideStrip("contour shift outside the analyticity strip");
        return a;
    }
    // The Gaussian strip is the whole plane, so the contour can sit at the
    // saddle a = -y, where the integrand stops oscillating altogether and the
    // price keeps full relative accuracy into the far wings. The damping
    // factor is folded into the integrand there, so the only limit is the
    // price itself underflowing near exp(-y^2/2) ~ 1e-308.
    if (p.bachelier_limit) {
        if (std::abs(y) >= 1.0) return std::clamp(-y, -37.0, 37.0);
        return y >= 0.0 ? -1.0 : 1.0;
    }
    // Shift away from the payoff side so exp(y a) damps instead of amplifying.
    return y >= 0.0 ? -0.5 * sb.p_minus : 0.5 * sb.p_plus;
}

}  // namespace

double lewis_call_normalized(double y, const ModelParams& p, const QuadratureConfig& cfg) {
    if (!std::isfinite(y)) throw InvalidInput("moneyness must be finite");

    const StripBounds sb = strip_bounds(p);
    const double a = pick_contour(y, sb, p, cfg);
    const double residue = a > 0.0 ? -y : 0.0;

    // The characteristic function carries a linear phase: exp(i u eta) in
    // general, exp(-i xi a) from -u^2/2 in the Gaussian limit. Folding it into
    // the oscillator keeps the panel factor genuinely smooth; at the Gaussian
    // saddle a = -y the combined oscillation cancels exactly.
    const double eta_osc = p.bachelier_limit ? -a : p.eta;
    const double omega = y - eta_osc;

    // At the Gaussian saddle exp(y a) and exp(a^2/2) are astronomical in
    // opposite directions; keep their product inside one exponential.
    const double fold = p.bachelier_limit ? y * a : 0.0;

    auto smooth = [&](double xi) -> cd {
        const cd u(xi, a);
        const cd log_phi = log_cf_z(u, p) - cd(0.0, xi * eta_osc) + fold;
        const cd denom(-a, xi);  // i u = i xi - a
        return std::exp(log_phi) / (denom * denom);
    };

    const double damp = p.bachelier_limit ? 1.0 : std::exp(y * a);
    const double tol = cfg.tolerance > 0 ? cfg.tolerance : 1e-11;
    const int degree = std::clamp(cfg.filon_degree, 8, 40);

    cd acc(0.0, 0.0);
    double lo = 0.0;
    double width = std::clamp(std::abs(a), 0.1, 1.0);
    double prev_center = 0.0, prev_max = 0.0;
    bool have_prev = false;

    for (int panel = 0; lo < cfg.xi_max; ++panel) {
        const double hi = std::min(lo + width, cfg.xi_max);
        num::FilonPanel fp(smooth, lo, hi, degree);
        acc += fp.integral(omega);

        const double center = 0.5 * (lo + hi);
        const double cur_max = fp.smooth_max();

        if (panel >= 3) {
            if (cur_max == 0.0) break;
            // Estimate the local power-law decay |S| ~ xi^-q from consecutive
            // panel maxima; the remaining tail is about |S(hi)| hi / (q - 1).
            double q = 1.5;
            if (have_prev && prev_max > 0.0 && cur_max < prev_max && center > prev_center)
                q = std::log(prev_max / cur_max) / std::log(center / prev_center);
            if (q > 1.05) {
                const double tail = damp / M_PI * cur_max * hi / (q - 1.0);
                if (tail < 0.25 * tol) break;
            }
        }
        have_prev = true;
        prev_center = center;
        prev_max = cur_max;

        lo = hi;
        width *= 1.5;
        if (lo < 16.0) width = std::min(width, 2.0);
    }
    if (lo >= cfg.xi_max)
        throw QuadratureNotConverged("Fourier tail still significant at xi_max");

    const double price = residue + damp / M_PI * acc.real();
    if (!std::isfinite(price)) throw PriceNotFinite("contour integral not finite");
    return price;
}

double lewis_call(double x, double t, double B0, const ModelParams& p,
                  const QuadratureConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("maturity must be positive");
    if (!(B0 > 0.0)) throw NonPositiveDiscount("discount factor must be positive");
    const double s = p.sigma.scale(t);
    return B0 * s * lewis_call_normalized(x / s, p, cfg);
}

double mixture_call_normalized(double y, const ModelParams& p) {
    if (p.bachelier_limit) return cb(y, 1.0);
    const GDistribution dist(p.alpha, p.k);
    const GQuadrature q = g_quadrature(dist, p.eta, std::abs(y));
    return mixture_call_normalized(y, p, q);
}

double mixture_call_normalized(double y, const ModelParams& p, const GQuadrature& q) {
    if (!std::isfinite(y)) throw InvalidInput("moneyness must be finite");
    if (p.bachelier_limit) return cb(y, 1.0);
    const double eta = p.eta;
    return q.expect([&](double g) { return cb(y + eta * (g - 1.0), std::sqrt(g)); });
}

double mixture_call(double x, double t, double B0, const ModelParams& p) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("maturity must be positive");
    if (!(B0 > 0.0)) throw NonPositiveDiscount("discount factor must be positive");
    const double s = p.sigma.scale(t);
    return B0 * s * mixture_call_normalized(x / s, p);
}

LevyCurves levy_benchmark_params(double sigma_hat, double eta_hat, double k_hat, Alpha alpha) {
    if (!(sigma_hat > 0.0) || !std::isfinite(sigma_hat))
        throw InvalidInput("sigma_hat must be positive");
    if (!std::isfinite(eta_hat)) throw InvalidInput("eta_hat must be finite");
    if (!(k_hat > 0.0) || !std::isfinite(k_hat)) throw InvalidInput("k_hat must be positive");
    return LevyCurves{sigma_hat, eta_hat, k_hat, alpha};
}

}  // namespace abach
