// Copyright 2026 The psmaqb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSMAQB_RNG_HPP
#define PSMAQB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "psmaqb/core.hpp"

namespace psmaqb {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the independent substream for run `index` under `master`.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Reproducible random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions are implemented here
/// because the standard library ones are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    void reseed(std::uint64_t seed)
    {
        engine_.seed(seed);
        seed_ = seed;
        spare_.reset();
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via the Marsaglia polar method.
    double normal()
    {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        return u * f;
    }

    /// Uniform point on the unit sphere in R^n_dim (normalized isotropic Gaussian).
    UnitVector sphere(int n_dim)
    {
        if (n_dim < 2)
            throw ConfigError("sphere sampling needs n_dim >= 2");
        Vector g(n_dim);
        for (;;) {
            for (int i = 0; i < n_dim; ++i)
                g[i] = normal();
            if (auto u = UnitVector::try_normalize(g))
                return *u;
        }
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::optional<double> spare_;
};

} // namespace psmaqb

#endif
