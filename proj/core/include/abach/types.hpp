#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace abach {

// Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
    explicit Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define ABACH_DEFINE_ERROR(NAME)                                        \
    struct NAME : Error {                                               \
        explicit NAME(const std::string& what) : Error(#NAME, what) {}  \
    }

ABACH_DEFINE_ERROR(InvalidInput);
ABACH_DEFINE_ERROR(BranchCutViolation);
ABACH_DEFINE_ERROR(OutsideStrip);
ABACH_DEFINE_ERROR(QuadratureNotConverged);
ABACH_DEFINE_ERROR(UnsupportedAlpha);
ABACH_DEFINE_ERROR(PriceBelowIntrinsic);
ABACH_DEFINE_ERROR(PriceNotFinite);
ABACH_DEFINE_ERROR(TooFewCouples);
ABACH_DEFINE_ERROR(NonPositiveDiscount);
ABACH_DEFINE_ERROR(MissingOisCurve);
ABACH_DEFINE_ERROR(NoBracketingQuotes);
ABACH_DEFINE_ERROR(OptimizerNotConverged);
ABACH_DEFINE_ERROR(EmptyQuoteSet);
ABACH_DEFINE_ERROR(CdfTabulationFailed);
ABACH_DEFINE_ERROR(SchemaError);
ABACH_DEFINE_ERROR(SchemaVersionMismatch);
ABACH_DEFINE_ERROR(ValueError);
ABACH_DEFINE_ERROR(NegativeInterval);
ABACH_DEFINE_ERROR(IoError);

#undef ABACH_DEFINE_ERROR

// Tempered-stable family index. alpha = 0 selects the gamma subordinator
// (logarithmic Laplace exponent), alpha = 1/2 the inverse Gaussian one.
// Valid range is [0, 1).
class Alpha {
public:
    explicit Alpha(double a) : a_(a) {
        if (!(a >= 0.0 && a < 1.0))
            throw InvalidInput("alpha must lie in [0,1), got " + std::to_string(a));
    }
    double value() const noexcept { return a_; }
    bool is_gamma() const noexcept { return a_ == 0.0; }
    bool is_inverse_gaussian() const noexcept { return a_ == 0.5; }

private:
    double a_;
};

// Deterministic volatility term structure sigma_t, t > 0. Interpolation is
// linear in total variance sigma_t^2 * t between knots; sigma is held flat
// beyond the last knot. Below the first knot total variance is linear from
// the origin, which keeps sigma constant there as well.
class VolCurve {
public:
    VolCurve(std::vector<double> times, std::vector<double> sigmas);

    static VolCurve constant(double sigma) { return VolCurve({1.0}, {sigma}); }

    double sigma(double t) const;
    // Total variance sigma_t^2 * t; non-decreasing in t by construction.
    double variance(double t) const;
    // sigma_t * sqrt(t), the natural scale of the model at maturity t.
    double scale(double t) const { return std::sqrt(variance(t)); }

    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& sigmas() const noexcept { return s_; }

private:
    std::vector<double> t_, s_, v_;  // v_ = sigma^2 * t at the knots
};

// Full parameter set of the model: volatility term structure, skew eta,
// variance-of-variance k and the family index alpha. The Bachelier
// (Gaussian) limit k -> 0+ is represented by an explicit flag; k itself is
// required to stay strictly positive.
struct ModelParams {
    VolCurve sigma;
    double eta = 0.0;
    double k = 1.0;
    Alpha alpha{0.5};
    bool bachelier_limit = false;

    ModelParams(VolCurve sigma_, double eta_, double k_, Alpha alpha_);

    // Gaussian limit: eta and k are ignored by every consumer.
    static ModelParams bachelier(VolCurve sigma_);
};

// Analyticity strip of the characteristic function, in moneyness-normalized
// units (p_minus, p_plus) and in price units at maturity t (divide by
// sigma_t sqrt(t)). The characteristic function u -> phi_t(u) is analytic
// for Im(u) in (-p_minus_t, p_plus_t).
struct StripBounds {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double p_plus_t = 0.0;
    double p_minus_t = 0.0;
};

}  // namespace abach
