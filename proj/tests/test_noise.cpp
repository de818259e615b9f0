#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "krsl/noise.hpp"

using namespace krsl;

namespace {

std::pair<double, double> mean_var(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size());
    return {m, v};
}

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

}  // namespace

TEST_CASE("empty draw and parameter validation") {
    CHECK(sample_noise(NoiseDensity{GaussianNoise{1.0}}, 0, {1, 0}).empty());
    CHECK_THROWS_AS(sample_noise(NoiseDensity{GaussianNoise{0.0}}, 1, {1, 0}), parameter_error);
    CHECK_THROWS_AS(sample_noise(NoiseDensity{UniformNoise{-1.0}}, 1, {1, 0}), parameter_error);
    CHECK_THROWS_AS(sample_noise(NoiseDensity{CauchyNoise{0.0}}, 1, {1, 0}), parameter_error);
    MixtureOutlierModel bad{1.5, GaussianNoise{1.0}, GaussianNoise{15.0}};
    CHECK_THROWS_AS(sample_noise(NoiseModel{bad}, 1, {1, 0}), parameter_error);
}

TEST_CASE("determinism: identical RngSpec gives bit-identical sequences") {
    const NoiseModel model{NoiseDensity{LaplaceNoise{2.0}}};
    const auto a = sample_noise(model, 10000, {123, 7});
    const auto b = sample_noise(model, 10000, {123, 7});
    CHECK(a == b);
    const auto c = sample_noise(model, 10000, {123, 8});
    CHECK(a != c);
}

TEST_CASE("stream independence: near-zero cross-correlation") {
    const NoiseModel model{NoiseDensity{GaussianNoise{1.0}}};
    const auto a = sample_noise(model, 100000, {55, 0});
    const auto b = sample_noise(model, 100000, {55, 1});
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
    cov /= static_cast<double>(a.size());
    CHECK(std::abs(cov / std::sqrt(va * vb)) < 0.01);
}

TEST_CASE("uniform over [-sqrt(5), sqrt(5)]: variance 5/3") {
    const auto xs = sample_noise(NoiseDensity{UniformNoise{std::sqrt(5.0)}}, 1000000, {77, 0});
    const auto [m, v] = mean_var(xs);
    CHECK(v == doctest::Approx(5.0 / 3.0).epsilon(0.01 / (5.0 / 3.0)));
    CHECK(std::abs(m) < 0.01);
    for (double x : xs) CHECK(std::abs(x) <= std::sqrt(5.0));
}

TEST_CASE("sine wave amplitude 2: range and variance") {
    const auto xs = sample_noise(NoiseDensity{SineWaveNoise{2.0}}, 1000000, {78, 0});
    for (double x : xs) CHECK(std::abs(x) <= 2.0);
    const auto [m, v] = mean_var(xs);
    CHECK(v == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::abs(m) < 0.01);
}

TEST_CASE("moment checks within 5 standard errors at 1e6 draws") {
    const std::size_t n = 1000000;
    const double nd = static_cast<double>(n);

    // Gaussian: var 1, SE(var) ~ sqrt(2/n).
    {
        const auto xs = sample_noise(NoiseDensity{GaussianNoise{1.0}}, n, {79, 0});
        const auto [m, v] = mean_var(xs);
        CHECK(std::abs(m) < 5.0 / std::sqrt(nd));
        CHECK(std::abs(v - 1.0) < 5.0 * std::sqrt(2.0 / nd));
    }
    // Laplace: var sigma_v^2, Var(x^2) = 5 sigma_v^4 (excess kurtosis 3).
    {
        const auto xs = sample_noise(NoiseDensity{LaplaceNoise{2.0}}, n, {80, 0});
        const auto [m, v] = mean_var(xs);
        CHECK(std::abs(m) < 5.0 * std::sqrt(2.0 / nd));
        CHECK(std::abs(v - 2.0) < 5.0 * std::sqrt(5.0 * 4.0 / nd));
    }
    // Binary: exactly +-a, mean near 0.
    {
        const auto xs = sample_noise(NoiseDensity{BinaryNoise{1.5}}, n, {81, 0});
        for (double x : xs) CHECK((x == 1.5 || x == -1.5));
        const auto [m, v] = mean_var(xs);
        CHECK(std::abs(m) < 5.0 * 1.5 / std::sqrt(nd));
        CHECK(v == doctest::Approx(2.25).epsilon(0.01));
    }
    // Cauchy: no variance; check the median and the IQR-type fraction
    // P(|x| <= scale) = 1/2 within 5 binomial SEs.
    {
        const auto xs = sample_noise(NoiseDensity{CauchyNoise{1.0}}, n, {82, 0});
        std::size_t inside = 0;
        for (double x : xs)
            if (std::abs(x) <= 1.0) ++inside;
        const double frac = static_cast<double>(inside) / nd;
        CHECK(std::abs(frac - 0.5) < 5.0 * std::sqrt(0.25 / nd));
    }
}

TEST_CASE("mixture with c = 0 is distributionally identical to the inner noise") {
    MixtureOutlierModel mix{0.0, GaussianNoise{1.0}, GaussianNoise{15.0}};
    const auto a = sample_noise(NoiseModel{mix}, 100000, {90, 0});
    const auto b = sample_noise(NoiseModel{NoiseDensity{GaussianNoise{1.0}}}, 100000, {91, 0});
    // Two-sample KS 1% critical value: 1.628 * sqrt(2/n).
    const double crit = 1.628 * std::sqrt(2.0 / 100000.0);
    CHECK(ks_statistic(a, b) < crit);
}

TEST_CASE("mixture outlier frequency matches c") {
    MixtureOutlierModel mix{0.1, GaussianNoise{1e-6}, GaussianNoise{10000.0}};
    const auto xs = sample_noise(NoiseModel{mix}, 200000, {92, 0});
    std::size_t outliers = 0;
    for (double x : xs)
        if (std::abs(x) > 1.0) ++outliers;
    const double frac = static_cast<double>(outliers) / 200000.0;
    CHECK(frac == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("noise_variance catalogue") {
    CHECK(noise_variance(NoiseDensity{GaussianNoise{2.5}}) == 2.5);
    CHECK(noise_variance(NoiseDensity{BinaryNoise{2.0}}) == 4.0);
    CHECK(noise_variance(NoiseDensity{UniformNoise{std::sqrt(5.0)}}) ==
          doctest::Approx(5.0 / 3.0));
    CHECK(noise_variance(NoiseDensity{LaplaceNoise{1.7}}) == 1.7);
    CHECK(noise_variance(NoiseDensity{SineWaveNoise{2.0}}) == doctest::Approx(2.0));
    CHECK(std::isinf(noise_variance(NoiseDensity{CauchyNoise{1.0}})));
}
