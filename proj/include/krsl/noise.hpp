#pragma once

// Reproducible random-signal generation: the noise distributions of the
// experiment suite plus the Bernoulli mixture-outlier contamination model.
// All sampling goes through explicit inverse-transform / Box-Muller maps
// over mt19937_64 output, so identical (seed, stream) pairs give
// bit-identical sequences on every platform.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "krsl/errors.hpp"

namespace krsl {

inline constexpr const char* kGeneratorId = "mt19937_64/inverse-transform v1";

/// One independent, replayable random stream per (seed, stream id).
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Uniform-double source; the engine state is derived from (seed, stream)
/// by splitmix64 so distinct streams decorrelate.
class RandomStream {
public:
    explicit RandomStream(RngSpec spec) {
        std::uint64_t s = spec.seed;
        (void)detail::splitmix64(s);
        s ^= 0xd1b54a32d192ed03ULL * (spec.stream + 1);
        engine_.seed(detail::splitmix64(s));
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    double normal(double stddev) {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

struct GaussianNoise {
    double variance = 1.0;
};
/// Two-point measure on {-a, +a}, equiprobable.
struct BinaryNoise {
    double a = 1.0;
};
struct UniformNoise {
    double half_width = 1.0;  // support [-b, b]
};
struct LaplaceNoise {
    double variance = 1.0;
};
struct CauchyNoise {
    double scale = 1.0;
};
/// v = A sin(omega), omega uniform over [0, 2*pi); arcsine-type density.
struct SineWaveNoise {
    double amplitude = 1.0;
};

using NoiseDensity =
    std::variant<GaussianNoise, BinaryNoise, UniformNoise, LaplaceNoise, CauchyNoise, SineWaveNoise>;

/// v = (1-a)A + aB with a ~ Bernoulli(c); B is the high-variance outlier process.
struct MixtureOutlierModel {
    double c = 0.0;
    NoiseDensity inner;
    NoiseDensity outlier;
};

using NoiseModel = std::variant<NoiseDensity, MixtureOutlierModel>;

inline void validate(const NoiseDensity& d) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                if (!(v.variance > 0.0)) throw parameter_error("gaussian noise: variance must be > 0");
            } else if constexpr (std::is_same_v<T, BinaryNoise>) {
                if (!(v.a > 0.0)) throw parameter_error("binary noise: amplitude must be > 0");
            } else if constexpr (std::is_same_v<T, UniformNoise>) {
                if (!(v.half_width > 0.0)) throw parameter_error("uniform noise: half width must be > 0");
            } else if constexpr (std::is_same_v<T, LaplaceNoise>) {
                if (!(v.variance > 0.0)) throw parameter_error("laplace noise: variance must be > 0");
            } else if constexpr (std::is_same_v<T, CauchyNoise>) {
                if (!(v.scale > 0.0)) throw parameter_error("cauchy noise: scale must be > 0");
            } else if constexpr (std::is_same_v<T, SineWaveNoise>) {
                if (!(v.amplitude > 0.0)) throw parameter_error("sine wave noise: amplitude must be > 0");
            }
        },
        d);
}

inline void validate(const NoiseModel& m) {
    if (const auto* mix = std::get_if<MixtureOutlierModel>(&m)) {
        if (mix->c < 0.0 || mix->c > 1.0)
            throw parameter_error("mixture noise: occurrence probability must lie in [0, 1]");
        validate(mix->inner);
        validate(mix->outlier);
    } else {
        validate(std::get<NoiseDensity>(m));
    }
}

inline double draw(const NoiseDensity& d, RandomStream& rng) {
    return std::visit(
        [&rng](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return rng.normal(std::sqrt(v.variance));
            } else if constexpr (std::is_same_v<T, BinaryNoise>) {
                return rng.uniform() < 0.5 ? -v.a : v.a;
            } else if constexpr (std::is_same_v<T, UniformNoise>) {
                return v.half_width * (2.0 * rng.uniform() - 1.0);
            } else if constexpr (std::is_same_v<T, LaplaceNoise>) {
                const double b = std::sqrt(v.variance / 2.0);
                const double q = rng.uniform() - 0.5;
                const double mag = -b * std::log1p(-2.0 * std::abs(q));
                return q < 0.0 ? -mag : mag;
            } else if constexpr (std::is_same_v<T, CauchyNoise>) {
                return v.scale * std::tan(M_PI * (rng.uniform() - 0.5));
            } else {
                static_assert(std::is_same_v<T, SineWaveNoise>);
                return v.amplitude * std::sin(2.0 * M_PI * rng.uniform());
            }
        },
        d);
}

inline double draw(const NoiseModel& m, RandomStream& rng) {
    if (const auto* mix = std::get_if<MixtureOutlierModel>(&m)) {
        const bool hit = rng.uniform() < mix->c;
        return hit ? draw(mix->outlier, rng) : draw(mix->inner, rng);
    }
    return draw(std::get<NoiseDensity>(m), rng);
}

inline std::vector<double> sample_noise(const NoiseModel& m, std::size_t n, RngSpec spec) {
    validate(m);
    RandomStream rng(spec);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = draw(m, rng);
    return out;
}

inline double noise_variance(const NoiseDensity& d) {
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) return v.variance;
            else if constexpr (std::is_same_v<T, BinaryNoise>) return v.a * v.a;
            else if constexpr (std::is_same_v<T, UniformNoise>)
                return v.half_width * v.half_width / 3.0;
            else if constexpr (std::is_same_v<T, LaplaceNoise>) return v.variance;
            else if constexpr (std::is_same_v<T, CauchyNoise>)
                return std::numeric_limits<double>::infinity();
            else return v.amplitude * v.amplitude / 2.0;
        },
        d);
}

}  // namespace krsl
