#pragma once

#include <cmath>
#include <limits>

// Standard normal utilities. Everything here is branch-stable in the far
// tails: cdf via erfc, tail expectations via the Mills-ratio continued
// fraction, quantile via the Wichura AS241 rational fits.

namespace abach::num {

inline constexpr double SQRT_2PI = 2.5066282746310005024;
inline constexpr double INV_SQRT_2PI = 0.3989422804014326779;
inline constexpr double LN_SQRT_2PI = 0.9189385332046727418;
inline constexpr double SQRT_2 = 1.4142135623730950488;

inline double norm_pdf(double z) { return INV_SQRT_2PI * std::exp(-0.5 * z * z); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / SQRT_2); }

inline double ln_norm_pdf(double z) { return -0.5 * z * z - LN_SQRT_2PI; }

// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
inline double erfcx(double x) {
    if (x < 12.0) return std::exp(x * x) * std::erfc(x);
    // Asymptotic continued fraction; converges fast for large x.
    double t = 0.0;
    for (int n = 16; n >= 1; --n) t = 0.5 * n / (x + t);
    return 1.0 / ((x + t) * 1.7724538509055160273);  // sqrt(pi)
}

inline double ln_norm_cdf(double z) {
    if (z > -1.0) return std::log(norm_cdf(z));
    // ln Phi(z) = -z^2/2 + ln( erfcx(-z/sqrt2) / 2 )
    return -0.5 * z * z + std::log(0.5 * erfcx(-z / SQRT_2));
}

// Tail factor q(d) = 1 - d * Phi(-d)/phi(d) for d >= 0, evaluated without
// cancellation: the Mills continued fraction gives Phi(-d)/phi(d) =
// 1/(d + T1) with T1 = 1/(d + 2/(d + 3/(d + ...))), so q(d) = T1/(d + T1).
inline double mills_tail_factor(double d) {
    // Below d = 3 the subtraction loses only one digit while the fraction
    // would need more than 60 levels, so cross over there.
    if (d < 3.0) {
        return 1.0 - d * norm_cdf(-d) / norm_pdf(d);
    }
    double t = 0.0;
    for (int n = 60; n >= 1; --n) t = n / (d + t);
    return t / (d + t);
}

// Inverse standard normal cdf (Wichura, algorithm AS241, double precision).
inline double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

}  // namespace abach::num
