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

#ifndef PSMAQB_ENVIRONMENTS_HPP
#define PSMAQB_ENVIRONMENTS_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>

#include "psmaqb/bloch_map.hpp"
#include "psmaqb/core.hpp"
#include "psmaqb/rng.hpp"

namespace psmaqb {

/// One draw from an environment.
struct MeasurementOutcome {
    int r = 0;              ///< Born outcome bit; -1 when the reward is not a measurement.
    double r_tilde = 0.0;   ///< Linear reward with mean <theta, a>.
    double p = 0.0;         ///< Born probability of r = 1 (qubit-style map for synthetic dims).
    double mean = 0.0;      ///< <theta, a>.
    double variance = 0.0;  ///< Var[r_tilde | a].
    bool post_state_aligned = false; ///< Post-measurement state is Pi_a (equals r == 1).
};

/// What policies need from an environment. `truth()` and `quantum_dim()`
/// feed logging only; no policy decision reads them.
template <class E>
concept Environment = requires(E& e, const E& ce, const UnitVector& a) {
    { e.sample(a) } -> std::same_as<MeasurementOutcome>;
    { ce.truth() } -> std::convertible_to<const UnitVector&>;
    { ce.n_dim() } -> std::convertible_to<int>;
    { ce.quantum_dim() } -> std::convertible_to<int>;
};

/// Variance of the renormalized Born reward: (d/(d-1))^2 p (1 - p), which
/// equals (1 - x)(1 + (d-1) x) for x = <theta, a>.
inline double born_variance(double p, int d)
{
    const double s = static_cast<double>(d) / (d - 1);
    return s * s * p * (1.0 - p);
}

/// <theta, a> for unit vectors, snapped to +-1 within the unit-norm tolerance
/// so that measuring exactly along (or against) the state is noiseless.
inline double unit_inner(const UnitVector& a, const UnitVector& theta)
{
    const double x = std::clamp(a.dot(theta), -1.0, 1.0);
    if (1.0 - std::abs(x) <= UnitVector::kNormTolerance)
        return x > 0.0 ? 1.0 : -1.0;
    return x;
}

inline UnitVector random_pure_state(Rng& rng, int n_dim) { return rng.sphere(n_dim); }

/// Unknown pure state Pi_theta probed with rank-1 projective measurements.
class PureStateEnv {
public:
    PureStateEnv(UnitVector theta, QuantumDims dims, std::uint64_t seed)
        : theta_(std::move(theta)), dims_(dims), rng_(seed)
    {
        require_same_dim(theta_.dim(), dims_.n_dim(), "PureStateEnv");
    }

    static PureStateEnv qubit(UnitVector theta, std::uint64_t seed)
    {
        return PureStateEnv(std::move(theta), QuantumDims::qubit(), seed);
    }

    MeasurementOutcome sample(const UnitVector& a)
    {
        require_same_dim(a.dim(), theta_.dim(), "PureStateEnv::sample");
        MeasurementOutcome out;
        out.mean = unit_inner(a, theta_);
        out.p = bloch::trace_overlap(out.mean, dims_.d);
        out.r = rng_.bernoulli(out.p) ? 1 : 0;
        out.r_tilde = bloch::renormalize_reward(out.r, dims_.d);
        out.variance = born_variance(out.p, dims_.d);
        out.post_state_aligned = out.r == 1;
        return out;
    }

    void reseed(std::uint64_t seed) { rng_.reseed(seed); }
    std::uint64_t seed() const { return rng_.seed(); }

    const UnitVector& truth() const { return theta_; }
    int n_dim() const { return dims_.n_dim(); }
    int quantum_dim() const { return dims_.d; }

private:
    UnitVector theta_;
    QuantumDims dims_;
    Rng rng_;
};

enum class NoiseModel { born, gaussian };

inline std::string_view to_string(NoiseModel m) { return m == NoiseModel::born ? "born" : "gaussian"; }

inline NoiseModel parse_noise_model(std::string_view s)
{
    if (s == "born")
        return NoiseModel::born;
    if (s == "gaussian")
        return NoiseModel::gaussian;
    throw ConfigError("unknown noise model '" + std::string(s) + "'");
}

/// Linear bandit on the sphere with reward <theta, a> + eps and
/// Var[eps | a] <= 1 - <theta, a>^2.
///
/// `born` reproduces the measurement noise of a d-level pure state (n_dim must
/// be d^2 - 1). `gaussian` is a synthetic model with variance exactly
/// 1 - <theta, a>^2 at any n_dim; its Born-probability column uses the qubit
/// map p = (1 + <theta, a>) / 2 so that quantum-style logging stays defined.
class VanishingVarianceEnv {
public:
    VanishingVarianceEnv(UnitVector theta, NoiseModel model, std::uint64_t seed)
        : theta_(std::move(theta)), model_(model), rng_(seed)
    {
        if (theta_.dim() < 2)
            throw ConfigError("VanishingVarianceEnv needs n_dim >= 2");
        if (auto q = QuantumDims::from_n_dim(static_cast<int>(theta_.dim())))
            d_ = q->d;
        else if (model_ == NoiseModel::born)
            throw ConfigError("born noise needs n_dim = d^2 - 1, got " + std::to_string(theta_.dim()));
    }

    MeasurementOutcome sample(const UnitVector& a)
    {
        require_same_dim(a.dim(), theta_.dim(), "VanishingVarianceEnv::sample");
        MeasurementOutcome out;
        out.mean = unit_inner(a, theta_);
        if (model_ == NoiseModel::born) {
            out.p = bloch::trace_overlap(out.mean, d_);
            out.r = rng_.bernoulli(out.p) ? 1 : 0;
            out.r_tilde = bloch::renormalize_reward(out.r, d_);
            out.variance = born_variance(out.p, d_);
            out.post_state_aligned = out.r == 1;
        } else {
            const double var = std::max(0.0, 1.0 - out.mean * out.mean);
            const double z = rng_.normal();
            out.r = -1;
            out.r_tilde = var == 0.0 ? out.mean : out.mean + std::sqrt(var) * z;
            out.p = std::clamp((1.0 + out.mean) / 2.0, 0.0, 1.0);
            out.variance = var;
        }
        return out;
    }

    void reseed(std::uint64_t seed) { rng_.reseed(seed); }
    std::uint64_t seed() const { return rng_.seed(); }

    NoiseModel noise_model() const { return model_; }
    const UnitVector& truth() const { return theta_; }
    int n_dim() const { return static_cast<int>(theta_.dim()); }
    /// d for n_dim = d^2 - 1; 2 for synthetic dimensions (qubit-style logging).
    int quantum_dim() const { return model_ == NoiseModel::born ? d_ : 2; }

private:
    UnitVector theta_;
    NoiseModel model_;
    Rng rng_;
    int d_ = 2;
};

static_assert(Environment<PureStateEnv>);
static_assert(Environment<VanishingVarianceEnv>);

} // namespace psmaqb

#endif
