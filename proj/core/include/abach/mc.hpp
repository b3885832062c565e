#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "abach/types.hpp"

namespace abach {

// philox4x32-10 counter-based generator. Streams with the same seed and
// different stream ids are independent; construction is free, so a fresh
// stream per work unit is the intended pattern.
class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double uniform();  // strictly inside (0, 1)
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t pos_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int left_ = 0;
};

struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Mean-one mixing variable: gamma via Marsaglia-Tsang for alpha = 0, inverse
// Gaussian via Michael-Schucany-Haas for alpha = 1/2. Other alpha have no
// exact sampler and throw UnsupportedAlpha.
double sample_G(Alpha alpha, double k, Philox& rng);

// One draw of f_t = sigma_t sqrt(t) (eta (1 - G) + sqrt(G) N).
double sample_marginal(double t, const ModelParams& p, Philox& rng);

// Path simulation on a fixed monitoring grid. The first increment is drawn
// exactly where the G family allows it; every later increment inverts a
// Gil-Pelaez tabulation of the increment CDF: 2048 abscissas spanning +-12
// increment standard deviations, monotone cubic inverse, oscillatory
// integrals on shared Filon-Legendre panels. For alpha = 0 an increment
// keeps an atom of mass (v1/v2)^(1/k) at eta d(sigma sqrt(t)), which is
// split off and sampled as a two-point mixture. Flat-variance steps are
// deterministic zeros; the Bachelier limit walks a plain Gaussian.
// Construction does all transform work; sampling is table lookups.
class PathSampler {
public:
    PathSampler(const ModelParams& p, std::vector<double> times);

    const std::vector<double>& times() const noexcept { return times_; }
    void sample(Philox& rng, std::vector<double>& f) const;  // f[j] = f at times()[j]

private:
    struct InverseCdf {
        std::vector<double> u, x, m;  // CDF knots, abscissas, Hermite slopes
        double operator()(double p) const;
    };
    enum class StepKind { Zero, Gaussian, ExactMixture, Tabulated };
    struct Step {
        StepKind kind = StepKind::Zero;
        double sd = 0.0;     // Gaussian: sqrt of the variance increment
        double scale = 0.0;  // ExactMixture: sigma_t sqrt(t)
        double atom_mass = 0.0;
        double atom_x = 0.0;
        InverseCdf inv;
    };

    Step make_step(const ModelParams& p, double t1, double t2) const;
    static InverseCdf build_inverse(const std::vector<double>& cdf,
                                    const std::vector<double>& x);

    std::vector<double> times_;
    std::vector<Step> steps_;
    double eta_ = 0.0;
    double k_ = 1.0;
    Alpha alpha_{0.5};
    bool bachelier_ = false;
};

// Convenience wrapper: n_paths rows of f over `times`, row-major.
std::vector<double> sample_paths(const ModelParams& p, const std::vector<double>& times,
                                 std::size_t n_paths, const RngSpec& rng);

enum class PayoffKind { European, AsianArithmetic, BarrierDownOut };

struct PayoffSpec {
    PayoffKind kind = PayoffKind::European;
    double strike = 0.0;
    // down-and-out knockout level, checked at every monitoring date
    double barrier = -std::numeric_limits<double>::infinity();
    bool is_put = false;
};

struct McConfig {
    std::size_t n_paths = 100000;
    std::vector<double> times;  // monitoring dates; the last one is the expiry
    RngSpec rng;
};

struct McResult {
    double price = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

// Discounted Monte Carlo price with a standard error. Paths are consumed in
// blocks of 4096, block b drawing from rng stream `rng.stream + b` with
// Kahan-compensated block sums reduced in block order, so the result is a
// pure function of (seed, stream, n_paths) no matter how work is scheduled.
McResult price_exotic(const PayoffSpec& payoff, const McConfig& cfg, double F0, double B0,
                      const ModelParams& p);

}  // namespace abach
