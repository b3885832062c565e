#include "abach/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace abach::num {

namespace {

GaussLegendre compute_gl(int n) {
    GaussLegendre gl;
    gl.x.resize(n);
    gl.w.resize(n);
    const double eps = 1e-15;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < eps) break;
        }
        gl.x[i] = -x;
        gl.x[n - 1 - i] = x;
        gl.w[i] = gl.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& gl = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += gl.w[i] * f(c + h * gl.x[i]);
    return h * s;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_level) {
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    const double tmax = 3.8;

    auto add_points = [&](double h, bool odd_only) {
        double s = 0.0;
        const int kmax = static_cast<int>(tmax / h);
        for (int k = odd_only ? 1 : 0; k <= kmax; k += odd_only ? 2 : 1) {
            const double t = k * h;
            const double sh = 0.5 * M_PI * std::sinh(t);
            const double ch = std::cosh(sh);
            const double w = 0.5 * M_PI * std::cosh(t) / (ch * ch);
            const double u = std::tanh(sh);  // in (-1, 1)
            double fp = f(c + r * u);
            double fm = f(c - r * u);
            if (!std::isfinite(fp)) fp = 0.0;
            if (!std::isfinite(fm)) fm = 0.0;
            if (k == 0)
                s += w * fp;
            else
                s += w * (fp + fm);
        }
        return s;
    };

    double h = 1.0;
    double sum = add_points(h, false);
    double prev = r * h * sum;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        sum += add_points(h, true);
        const double cur = r * h * sum;
        if (level >= 3 && std::fabs(cur - prev) <= tol * (std::fabs(cur) + 1e-300))
            return cur;
        prev = cur;
    }
    return prev;
}

void sph_bessel_array(int nmax, double x, double* out) {
    if (x < 1e-10) {
        // j_n(x) ~ x^n / (2n+1)!!
        double p = 1.0;
        for (int n = 0; n <= nmax; ++n) {
            out[n] = p * (n == 0 ? 1.0 - x * x / 6.0 : 1.0);
            p *= x / (2.0 * n + 3.0);
        }
        return;
    }
    const double sx = std::sin(x), cx = std::cos(x);
    if (x > nmax + 2.0) {
        // upward recurrence, stable for x > n
        double jm = sx / x;
        out[0] = jm;
        if (nmax == 0) return;
        double j = sx / (x * x) - cx / x;
        out[1] = j;
        for (int n = 1; n < nmax; ++n) {
            double jn = (2.0 * n + 1.0) / x * j - jm;
            jm = j;
            j = jn;
            out[n + 1] = j;
        }
        return;
    }
    // downward Miller recurrence with renormalization via j_0
    const int start = nmax + 16 + static_cast<int>(x);
    double jp = 0.0, j = 1e-30;
    std::vector<double> tmp(nmax + 1);
    for (int n = start; n >= 1; --n) {
        double jm = (2.0 * n + 1.0) / x * j - jp;
        jp = j;
        j = jm;
        if (n - 1 <= nmax) tmp[n - 1] = j;
        if (std::fabs(j) > 1e280) {
            j *= 1e-280;
            jp *= 1e-280;
            for (int m = n - 1; m <= nmax; ++m) tmp[m] *= 1e-280;
        }
    }
    const double scale = (sx / x) / j;
    for (int n = 0; n <= nmax; ++n) out[n] = tmp[n] * scale;
}

FilonPanel::FilonPanel(const std::function<cd(double)>& S, double a, double b, int degree) {
    c_ = 0.5 * (a + b);
    h_ = 0.5 * (b - a);
    const int nn = degree + 1;
    const auto& gl = gauss_legendre(nn);
    std::vector<cd> sv(nn);
    smax_ = 0.0;
    for (int i = 0; i < nn; ++i) {
        sv[i] = S(c_ + h_ * gl.x[i]);
        smax_ = std::max(smax_, std::abs(sv[i]));
    }
    // Legendre projection a_n = (2n+1)/2 * sum w_i P_n(x_i) S_i
    coeff_.assign(nn, cd(0.0));
    for (int i = 0; i < nn; ++i) {
        double p0 = 1.0, p1 = gl.x[i];
        const cd ws = gl.w[i] * sv[i];
        coeff_[0] += ws;
        if (nn > 1) coeff_[1] += ws * p1;
        for (int n = 2; n < nn; ++n) {
            const double p2 = ((2.0 * n - 1.0) * gl.x[i] * p1 - (n - 1.0) * p0) / n;
            coeff_[n] += ws * p2;
            p0 = p1;
            p1 = p2;
        }
    }
    for (int n = 0; n < nn; ++n) coeff_[n] *= 0.5 * (2.0 * n + 1.0);
}

cd FilonPanel::integral(double omega) const {
    const int nn = static_cast<int>(coeff_.size());
    const double w = h_ * omega;
    std::vector<double> jn(nn);
    sph_bessel_array(nn - 1, std::fabs(w), jn.data());
    // integral_{-1}^{1} P_n(x) exp(-i w x) dx = 2 (-i)^n j_n(w),
    // and j_n(-w) = (-1)^n j_n(w): for w < 0 the factor becomes (+i)^n.
    const cd step = (w >= 0.0) ? cd(0.0, -1.0) : cd(0.0, 1.0);
    cd f(1.0, 0.0), sum(0.0);
    for (int n = 0; n < nn; ++n) {
        sum += coeff_[n] * (2.0 * jn[n]) * f;
        f *= step;
    }
    return h_ * std::exp(cd(0.0, -c_ * omega)) * sum;
}

}  // namespace abach::num
