#include "abach/mc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>

#include "abach/chf.hpp"
#include "abach/normal.hpp"
#include "abach/quadrature.hpp"

namespace abach {

using num::cd;

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

struct U32x2 {
    std::uint32_t hi, lo;
};

inline U32x2 mulhilo(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t p = std::uint64_t(a) * b;
    return {std::uint32_t(p >> 32), std::uint32_t(p)};
}

inline void philox_round(std::array<std::uint32_t, 4>& x, const std::array<std::uint32_t, 2>& k) {
    const U32x2 p0 = mulhilo(0xD2511F53u, x[0]);
    const U32x2 p1 = mulhilo(0xCD9E8D57u, x[2]);
    x = {p1.hi ^ x[1] ^ k[0], p1.lo, p0.hi ^ x[3] ^ k[1], p0.lo};
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      stream_{std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

void Philox::refill() {
    std::array<std::uint32_t, 4> x = {std::uint32_t(pos_), std::uint32_t(pos_ >> 32), stream_[0],
                                      stream_[1]};
    std::array<std::uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) {
        if (r) {
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        philox_round(x, k);
    }
    block_ = x;
    ++pos_;
    left_ = 2;  // two 64-bit lanes per counter block
}

std::uint64_t Philox::next_u64() {
    if (left_ == 0) refill();
    const int base = 2 * (2 - left_);
    --left_;
    return (std::uint64_t(block_[base]) << 32) | block_[base + 1];
}

double Philox::uniform() { return (next_u64() >> 11) * 0x1p-53 + 0x1p-54; }

double Philox::normal() { return num::norm_ppf(uniform()); }

namespace {

// Marsaglia-Tsang; shapes below one are boosted through U^(1/a).
double sample_gamma_shape(double a, Philox& rng) {
    double boost = 1.0;
    if (a < 1.0) {
        boost = std::pow(rng.uniform(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        const double z = rng.normal();
        const double b = 1.0 + c * z;
        if (b <= 0.0) continue;
        const double v = b * b * b;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * (z * z) * (z * z)) return boost * d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return boost * d * v;
    }
}

// Michael-Schucany-Haas for IG(1, 1/k); the smaller root is written in a
// form that cannot cancel for large normal draws.
double sample_ig_unit_mean(double k, Philox& rng) {
    const double z = rng.normal();
    const double y = z * z;
    const double x = y == 0.0 ? 1.0 : 1.0 - 2.0 * y / (y + std::sqrt(y * y + 4.0 * y / k));
    const double u = rng.uniform();
    return u <= 1.0 / (1.0 + x) ? x : 1.0 / x;
}

}  // namespace

double sample_G(Alpha alpha, double k, Philox& rng) {
    if (!(k > 0.0)) throw InvalidInput("k must be positive, got " + fmt(k));
    if (alpha.is_gamma()) return k * sample_gamma_shape(1.0 / k, rng);
    if (alpha.is_inverse_gaussian()) return sample_ig_unit_mean(k, rng);
    throw UnsupportedAlpha("no exact G sampler for alpha = " + fmt(alpha.value()));
}

double sample_marginal(double t, const ModelParams& p, Philox& rng) {
    if (!(t > 0.0)) throw InvalidInput("t must be positive, got " + fmt(t));
    const double s = p.sigma.scale(t);
    if (p.bachelier_limit) return s * rng.normal();
    const double g = sample_G(p.alpha, p.k, rng);
    const double n = rng.normal();
    return s * (p.eta * (1.0 - g) + std::sqrt(g) * n);
}

namespace {

constexpr int kGridPoints = 2048;
constexpr double kGridHalfWidthSd = 12.0;
constexpr double kCdfTol = 1e-9;

struct Tabulation {
    std::vector<double> x, F;
};

// F(x) = 1/2 - (1/pi) int_0^inf Im[phi(u) e^{-iu(x - x_shift)}] / u du on the
// fixed grid, for a phi with the linear drift phase already removed (so it is
// smooth, not oscillatory). `sd` sets the grid span, `u_feature` the
// reciprocal length on which the smooth factor phi(u)/u varies; the
// oscillation itself is handled exactly by the Filon panels, each projected
// once and reused for all 2048 abscissas.
Tabulation gil_pelaez_cdf(const std::function<cd(double)>& phi, double sd, double u_feature,
                          double x_shift) {
    Tabulation tab;
    tab.x.resize(kGridPoints);
    const double half = kGridHalfWidthSd * sd;
    for (int j = 0; j < kGridPoints; ++j)
        tab.x[j] = -half + (2.0 * half * j) / (kGridPoints - 1);

    std::vector<double> acc(kGridPoints, 0.0);

    // head: direct quadrature while the phase stays below a quarter radian
    const double u0 = 0.25 / (half + std::abs(x_shift));
    const auto& gl = num::gauss_legendre(24);
    for (size_t i = 0; i < gl.x.size(); ++i) {
        const double u = 0.5 * u0 * (gl.x[i] + 1.0);
        const double w = 0.5 * u0 * gl.w[i];
        const cd ph = phi(u);
        for (int j = 0; j < kGridPoints; ++j) {
            const double t = u * (tab.x[j] - x_shift);
            acc[j] += w * (ph.imag() * std::cos(t) - ph.real() * std::sin(t)) / u;
        }
    }

    const auto S = [&phi](double u) { return phi(u) / u; };
    double lo = u0;
    double width = 0.5 * u_feature;
    const double cap = 2.0 * width;
    const double u_max = 1e9 * u_feature;
    double prev_center = 0.0, prev_max = 0.0;
    bool have_prev = false;
    bool converged = false;
    int panel = 0;
    while (lo < u_max && panel < 600) {
        const double hi = lo + width;
        const num::FilonPanel fp(S, lo, hi, 19);
        for (int j = 0; j < kGridPoints; ++j)
            acc[j] += fp.integral(tab.x[j] - x_shift).imag();
        ++panel;

        const double cur_max = fp.smooth_max();
        const double center = 0.5 * (lo + hi);
        if (cur_max == 0.0) {
            converged = true;
            break;
        }
        if (have_prev && panel >= 3 && cur_max < prev_max) {
            const double q = std::log(prev_max / cur_max) / std::log(center / prev_center);
            if (q > 1.05 &&
                cur_max * hi / (q - 1.0) / std::numbers::pi < 0.25 * kCdfTol) {
                converged = true;
                break;
            }
        }
        have_prev = true;
        prev_center = center;
        prev_max = cur_max;
        lo = hi;
        if (width < cap)
            width = std::min(cap, width * 1.5);
        else if (lo > 16.0 * u_feature)  // sixteen feature lengths out: pure tail
            width *= 1.5;
    }
    if (!converged)
        throw CdfTabulationFailed("increment characteristic function did not decay by u = " +
                                  fmt(lo));

    tab.F.resize(kGridPoints);
    for (int j = 0; j < kGridPoints; ++j) tab.F[j] = 0.5 - acc[j] / std::numbers::pi;
    return tab;
}

// Clamp roundoff wiggles; anything gross means the transform went wrong.
void monotonize(Tabulation& tab) {
    double worst = 0.0;
    for (int j = 1; j < kGridPoints; ++j)
        if (tab.F[j] < tab.F[j - 1]) {
            worst = std::max(worst, tab.F[j - 1] - tab.F[j]);
            tab.F[j] = tab.F[j - 1];
        }
    if (worst > 1e-6)
        throw CdfTabulationFailed("tabulated CDF decreases by " + fmt(worst));
    for (double& f : tab.F) f = std::clamp(f, 0.0, 1.0);
    if (tab.F.back() - tab.F.front() < 0.5)
        throw CdfTabulationFailed("tabulated CDF spans only " +
                                  fmt(tab.F.back() - tab.F.front()) + " over the grid");
}

}  // namespace

double PathSampler::InverseCdf::operator()(double p) const {
    if (p <= u.front()) return x.front();
    if (p >= u.back()) return x.back();
    const auto it = std::upper_bound(u.begin(), u.end(), p);
    const size_t i = size_t(it - u.begin()) - 1;
    const double h = u[i + 1] - u[i];
    const double s = (p - u[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x[i] + (s3 - 2 * s2 + s) * h * m[i] +
           (-2 * s3 + 3 * s2) * x[i + 1] + (s3 - s2) * h * m[i + 1];
}

PathSampler::PathSampler(const ModelParams& p, std::vector<double> times)
    : times_(std::move(times)),
      eta_(p.eta),
      k_(p.k),
      alpha_(p.alpha),
      bachelier_(p.bachelier_limit) {
    if (times_.empty()) throw InvalidInput("monitoring grid is empty");
    for (size_t j = 0; j < times_.size(); ++j)
        if (!(times_[j] > (j ? times_[j - 1] : 0.0)))
            throw InvalidInput("monitoring dates must be positive and strictly increasing");
    steps_.reserve(times_.size());
    double t_prev = 0.0;
    for (double t : times_) {
        steps_.push_back(make_step(p, t_prev, t));
        t_prev = t;
    }
}

PathSampler::Step PathSampler::make_step(const ModelParams& p, double t1, double t2) const {
    Step st;
    const double v1 = t1 > 0.0 ? p.sigma.variance(t1) : 0.0;
    const double v2 = p.sigma.variance(t2);
    const double dv = v2 - v1;
    if (dv <= 0.0) return st;  // flat variance, deterministic zero
    if (p.bachelier_limit) {
        st.kind = StepKind::Gaussian;
        st.sd = std::sqrt(dv);
        return st;
    }
    if (t1 == 0.0 && (p.alpha.is_gamma() || p.alpha.is_inverse_gaussian())) {
        st.kind = StepKind::ExactMixture;
        st.scale = std::sqrt(v2);
        return st;
    }

    st.kind = StepKind::Tabulated;
    const double s1 = std::sqrt(v1), s2 = std::sqrt(v2);
    // Linear drift phase of the increment; for the gamma clock it is also the
    // location of the increment's atom.
    const double x0 = p.eta * (s2 - s1);
    if (p.alpha.is_gamma() && v1 > 0.0) {
        st.atom_mass = std::pow(v1 / v2, 1.0 / p.k);
        st.atom_x = x0;
    }
    const double mass = st.atom_mass;

    // With the atom removed, the remaining characteristic function still has
    // a slowly decaying -i T / u tail (the continuous density jumps at the
    // atom point). Subtract a one-sided exponential with the same tail and
    // add its CDF back in closed form afterwards.
    const double vvk = 1.0 + p.eta * p.eta * p.k;
    const double sd_inc = std::sqrt(dv * vvk);
    const double lam = 2.0 / sd_inc;
    double tail_T = 0.0;
    if (mass > 0.0 && p.eta != 0.0)
        tail_T = mass * (2.0 * p.eta / p.k) * (1.0 / s2 - 1.0 / s1) / (1.0 - mass);
    const double w_ref = std::abs(tail_T) / lam;

    const auto psi = [&p, t1, t2, mass, x0, tail_T, lam](double u) {
        cd lc = log_cf(cd(u, 0.0), t2, p);
        if (t1 > 0.0) lc -= log_cf(cd(u, 0.0), t1, p);
        lc -= cd(0.0, u * x0);
        cd ps = std::exp(lc);
        if (mass > 0.0) ps = (ps - mass) / (1.0 - mass);
        if (tail_T > 0.0)
            ps -= tail_T / cd(lam, u);  // exponential on the left of the atom
        else if (tail_T < 0.0)
            ps -= -tail_T / cd(lam, -u);
        return ps;
    };

    // the de-atomized remainder can be far wider than the increment itself,
    // so the panel width follows the broader of the two scales
    const double sd_feature = std::max(sd_inc, s2 * (1.0 + std::abs(p.eta)) *
                                                   std::max(1.0, std::sqrt(p.k)));
    Tabulation tab = gil_pelaez_cdf(psi, sd_inc, 1.0 / sd_feature, x0);
    if (w_ref > 0.0) {
        for (int j = 0; j < kGridPoints; ++j) {
            const double xp = tab.x[j] - x0;
            double fr;
            if (tail_T > 0.0)
                fr = xp <= 0.0 ? w_ref * std::exp(lam * xp) : w_ref;
            else
                fr = xp >= 0.0 ? w_ref * (1.0 - std::exp(-lam * xp)) : 0.0;
            tab.F[j] += fr - 0.5 * w_ref;
        }
    }
    monotonize(tab);
    st.inv = build_inverse(tab.F, tab.x);
    return st;
}

PathSampler::InverseCdf PathSampler::build_inverse(const std::vector<double>& cdf,
                                                   const std::vector<double>& x) {
    InverseCdf inv;
    // strictly increasing CDF knots only; flat stretches keep their first point
    for (size_t j = 0; j < cdf.size(); ++j)
        if (inv.u.empty() || cdf[j] > inv.u.back() + 1e-14) {
            inv.u.push_back(cdf[j]);
            inv.x.push_back(x[j]);
        }
    const size_t n = inv.u.size();
    if (n < 2) throw CdfTabulationFailed("tabulated CDF is flat across the grid");

    // Fritsch-Carlson slopes (harmonic mean of adjacent secants) keep the
    // cubic inverse monotone
    std::vector<double> d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) d[i] = (inv.x[i + 1] - inv.x[i]) / (inv.u[i + 1] - inv.u[i]);
    inv.m.assign(n, 0.0);
    inv.m.front() = d.front();
    inv.m.back() = d.back();
    for (size_t i = 1; i + 1 < n; ++i)
        inv.m[i] = (d[i - 1] <= 0.0 || d[i] <= 0.0) ? 0.0
                                                    : 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);
    return inv;
}

void PathSampler::sample(Philox& rng, std::vector<double>& f) const {
    f.resize(times_.size());
    double cum = 0.0;
    for (size_t j = 0; j < steps_.size(); ++j) {
        const Step& st = steps_[j];
        switch (st.kind) {
            case StepKind::Zero:
                break;
            case StepKind::Gaussian:
                cum += st.sd * rng.normal();
                break;
            case StepKind::ExactMixture: {
                const double g = sample_G(alpha_, k_, rng);
                const double n = rng.normal();
                cum += st.scale * (eta_ * (1.0 - g) + std::sqrt(g) * n);
                break;
            }
            case StepKind::Tabulated: {
                const double u = rng.uniform();
                if (u < st.atom_mass)
                    cum += st.atom_x;
                else if (st.atom_mass > 0.0)
                    cum += st.inv((u - st.atom_mass) / (1.0 - st.atom_mass));
                else
                    cum += st.inv(u);
                break;
            }
        }
        f[j] = cum;
    }
}

namespace {

constexpr std::size_t kBlockPaths = 4096;

struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

double payoff_value(const PayoffSpec& po, double F0, const std::vector<double>& f) {
    switch (po.kind) {
        case PayoffKind::European: {
            const double ft = F0 + f.back();
            return std::max(po.is_put ? po.strike - ft : ft - po.strike, 0.0);
        }
        case PayoffKind::AsianArithmetic: {
            double avg = 0.0;
            for (double v : f) avg += F0 + v;
            avg /= double(f.size());
            return std::max(po.is_put ? po.strike - avg : avg - po.strike, 0.0);
        }
        case PayoffKind::BarrierDownOut: {
            for (double v : f)
                if (F0 + v <= po.barrier) return 0.0;
            const double ft = F0 + f.back();
            return std::max(po.is_put ? po.strike - ft : ft - po.strike, 0.0);
        }
    }
    return 0.0;
}

}  // namespace

std::vector<double> sample_paths(const ModelParams& p, const std::vector<double>& times,
                                 std::size_t n_paths, const RngSpec& spec) {
    const PathSampler sampler(p, times);
    std::vector<double> out(n_paths * times.size());
    std::vector<double> f;
    std::size_t done = 0;
    for (std::size_t b = 0; done < n_paths; ++b) {
        Philox rng(spec.seed, spec.stream + b);
        const std::size_t m = std::min(kBlockPaths, n_paths - done);
        for (std::size_t i = 0; i < m; ++i) {
            sampler.sample(rng, f);
            std::copy(f.begin(), f.end(), out.begin() + (done + i) * times.size());
        }
        done += m;
    }
    return out;
}

McResult price_exotic(const PayoffSpec& payoff, const McConfig& cfg, double F0, double B0,
                      const ModelParams& p) {
    if (cfg.n_paths == 0) throw InvalidInput("n_paths must be positive");
    if (!(B0 > 0.0)) throw NonPositiveDiscount("B0 = " + fmt(B0));
    if (payoff.kind == PayoffKind::BarrierDownOut && F0 <= payoff.barrier)
        return {0.0, 0.0, cfg.n_paths};  // breached at inception

    const PathSampler sampler(p, cfg.times);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> f;
    std::size_t done = 0;
    for (std::size_t b = 0; done < cfg.n_paths; ++b) {
        Philox rng(cfg.rng.seed, cfg.rng.stream + b);
        const std::size_t m = std::min(kBlockPaths, cfg.n_paths - done);
        Kahan ks, ks2;
        for (std::size_t i = 0; i < m; ++i) {
            sampler.sample(rng, f);
            const double v = payoff_value(payoff, F0, f);
            ks.add(v);
            ks2.add(v * v);
        }
        sum += ks.s;
        sum_sq += ks2.s;
        done += m;
    }
    const double n = double(cfg.n_paths);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {B0 * mean, B0 * std::sqrt(var / n), cfg.n_paths};
}

}  // namespace abach
