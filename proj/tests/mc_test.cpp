#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "abach/mc.hpp"
#include "abach/pricer.hpp"

using namespace abach;

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, mu3 = 0.0;
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (double v : x) {
        const double d = v - m.mean;
        m.var += d * d;
        m.mu3 += d * d * d;
    }
    m.var /= static_cast<double>(x.size());
    m.mu3 /= static_cast<double>(x.size());
    return m;
}

}  // namespace

TEST_CASE("counter rng reproduces its known answers") {
    Philox rng(0, 0);
    CHECK(rng.next_u64() == 0x6627e8d5e169c58dULL);
    CHECK(rng.next_u64() == 0xbc57ac4c9b00dbd8ULL);
}

TEST_CASE("uniforms stay strictly inside the unit interval") {
    Philox rng(123, 5);
    double mn = 1.0, mx = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        sum += u;
    }
    CHECK(mn > 0.0);
    CHECK(mx < 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("seed and stream both separate the sequences") {
    Philox a(7, 0), b(7, 0), c(7, 1), d(8, 0);
    bool same_ab = true, same_ac = true, same_ad = true;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        same_ab &= (va == b.next_u64());
        same_ac &= (va == c.next_u64());
        same_ad &= (va == d.next_u64());
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
    CHECK_FALSE(same_ad);
}

TEST_CASE("normal draws have the right low moments") {
    Philox rng(2024, 0);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.normal();
    const auto m = moments(x);
    CHECK(std::abs(m.mean) < 0.015);
    CHECK(m.var == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(m.mu3) < 0.04);
}

TEST_CASE("clock samples match the gamma and inverse gaussian moments") {
    const int n = 200000;
    {
        Philox rng(11, 0);
        std::vector<double> g(n);
        for (auto& v : g) v = sample_G(Alpha(0.0), 1.1, rng);
        const auto m = moments(g);
        CHECK(m.mean == doctest::Approx(1.0).epsilon(0.02));
        CHECK(m.var == doctest::Approx(1.1).epsilon(0.05));
        CHECK(m.mu3 == doctest::Approx(2.0 * 1.1 * 1.1).epsilon(0.15));
    }
    {
        Philox rng(12, 0);
        std::vector<double> g(n);
        for (auto& v : g) v = sample_G(Alpha(0.5), 0.6, rng);
        const auto m = moments(g);
        CHECK(m.mean == doctest::Approx(1.0).epsilon(0.02));
        CHECK(m.var == doctest::Approx(0.6).epsilon(0.05));
        CHECK(m.mu3 == doctest::Approx(3.0 * 0.6 * 0.6).epsilon(0.15));
    }
}

TEST_CASE("terminal samples carry the model variance") {
    const ModelParams p(VolCurve::constant(1.5), -0.5, 2.0, Alpha(0.0));
    Philox rng(31, 0);
    const int n = 200000;
    std::vector<double> f(n);
    for (auto& v : f) v = sample_marginal(2.0, p, rng);
    const auto m = moments(f);
    // Var f_t = sigma^2 t (1 + eta^2 k)
    CHECK(std::abs(m.mean) < 0.03);
    CHECK(m.var == doctest::Approx(1.5 * 1.5 * 2.0 * 1.5).epsilon(0.03));
}

TEST_CASE("path increments are independent and add up to the marginal law") {
    const ModelParams p(VolCurve::constant(1.0), -0.3, 0.5, Alpha(0.5));
    PathSampler ps(p, {0.5, 1.0});
    REQUIRE(ps.times().size() == 2);
    Philox rng(77, 0);
    const int n = 100000;
    std::vector<double> f1(n), inc(n), path;
    for (int i = 0; i < n; ++i) {
        ps.sample(rng, path);
        f1[i] = path[0];
        inc[i] = path[1] - path[0];
    }
    const auto m1 = moments(f1);
    const auto mi = moments(inc);
    const double vz = 1.0 + 0.3 * 0.3 * 0.5;
    CHECK(m1.var == doctest::Approx(0.5 * vz).epsilon(0.03));
    CHECK(mi.var == doctest::Approx(0.5 * vz).epsilon(0.03));
    double cov = 0.0;
    for (int i = 0; i < n; ++i) cov += (f1[i] - m1.mean) * (inc[i] - mi.mean);
    cov /= n;
    CHECK(std::abs(cov / std::sqrt(m1.var * mi.var)) < 0.012);
}

TEST_CASE("gamma-clock paths pass the same screen through the tabulated step") {
    const ModelParams p(VolCurve::constant(1.0), -0.3, 0.5, Alpha(0.0));
    PathSampler ps(p, {0.5, 1.0});
    Philox rng(78, 0);
    const int n = 100000;
    std::vector<double> f2(n), path;
    for (int i = 0; i < n; ++i) {
        ps.sample(rng, path);
        f2[i] = path[1];
    }
    const auto m = moments(f2);
    CHECK(std::abs(m.mean) < 0.015);
    CHECK(m.var == doctest::Approx(1.0 + 0.3 * 0.3 * 0.5).epsilon(0.03));
}

TEST_CASE("fixed seeds make paths bit-reproducible") {
    const ModelParams p(VolCurve::constant(1.0), -0.6, 1.1, Alpha(0.5));
    const auto a = sample_paths(p, {0.25, 0.75, 1.5}, 512, RngSpec{99, 2});
    const auto b = sample_paths(p, {0.25, 0.75, 1.5}, 512, RngSpec{99, 2});
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    const auto c = sample_paths(p, {0.25, 0.75, 1.5}, 512, RngSpec{99, 3});
    CHECK(std::memcmp(a.data(), c.data(), a.size() * sizeof(double)) != 0);
}

TEST_CASE("monte carlo european agrees with the transform price") {
    const ModelParams p(VolCurve::constant(12.0), -0.6, 1.1, Alpha(0.5));
    const double F0 = 40.0, B0 = 0.99, t = 0.75, K = 43.0;
    McConfig cfg;
    cfg.n_paths = 200000;
    cfg.times = {t};
    cfg.rng = {2468, 0};
    const auto mc = price_exotic(PayoffSpec{PayoffKind::European, K}, cfg, F0, B0, p);
    const double ref = lewis_call(K - F0, t, B0, p);
    CHECK(std::abs(mc.price - ref) < 3.5 * mc.std_error);
    CHECK(mc.std_error > 0.0);
    CHECK(mc.n_paths == 200000);
}

TEST_CASE("put prices respect parity within the monte carlo error") {
    const ModelParams p(VolCurve::constant(12.0), -0.6, 1.1, Alpha(0.5));
    const double F0 = 40.0, B0 = 0.99, t = 0.75, K = 43.0;
    McConfig cfg;
    cfg.n_paths = 200000;
    cfg.times = {t};
    cfg.rng = {2468, 0};
    const auto call = price_exotic(PayoffSpec{PayoffKind::European, K}, cfg, F0, B0, p);
    PayoffSpec put{PayoffKind::European, K};
    put.is_put = true;
    const auto pp = price_exotic(put, cfg, F0, B0, p);
    // same paths, so call - put = B0 * (F0 - K + mean(f_T)); the sample mean
    // of f_T carries noise with sd sigma sqrt(t (1 + eta^2 k) / n)
    const double sd_f = 12.0 * std::sqrt(t * (1.0 + 0.6 * 0.6 * 1.1));
    const double se = B0 * sd_f / std::sqrt(double(cfg.n_paths));
    CHECK(std::abs(call.price - pp.price - B0 * (F0 - K)) < 3.5 * se);
}

TEST_CASE("averaging and knock-outs can only cheapen a call") {
    const ModelParams p(VolCurve::constant(12.0), -0.6, 1.1, Alpha(0.5));
    const double F0 = 40.0, B0 = 1.0, K = 41.0;
    McConfig cfg;
    cfg.n_paths = 60000;
    cfg.times = {0.25, 0.5, 0.75, 1.0};
    cfg.rng = {1357, 0};
    const auto euro = price_exotic(PayoffSpec{PayoffKind::European, K}, cfg, F0, B0, p);
    const auto asian = price_exotic(PayoffSpec{PayoffKind::AsianArithmetic, K}, cfg, F0, B0, p);
    PayoffSpec ko{PayoffKind::BarrierDownOut, K};
    ko.barrier = 35.0;
    const auto barrier = price_exotic(ko, cfg, F0, B0, p);
    CHECK(asian.price < euro.price);
    CHECK(barrier.price < euro.price);

    // a barrier no path can reach keeps every payoff intact
    ko.barrier = -1e9;
    const auto no_ko = price_exotic(ko, cfg, F0, B0, p);
    CHECK(no_ko.price == doctest::Approx(euro.price).epsilon(1e-12));
}
