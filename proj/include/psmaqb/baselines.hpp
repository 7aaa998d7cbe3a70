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

#ifndef PSMAQB_BASELINES_HPP
#define PSMAQB_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Cholesky>

#include "psmaqb/core.hpp"
#include "psmaqb/environments.hpp"
#include "psmaqb/records.hpp"
#include "psmaqb/rng.hpp"

// Reference policies: non-adaptive tomography (linear regret), a single
// round of adaptivity (sqrt(T) regret) and the clairvoyant oracle.
namespace psmaqb {

/// Linear-inversion estimate from measurements along the signed axes +-e_i:
/// the per-axis mean of sign * r_tilde, normalized.
class AxisInversion {
public:
    explicit AxisInversion(int n_dim) : sum_(Vector::Zero(n_dim)), count_(Vector::Zero(n_dim)) {}

    /// Direction number `i` of the cycle +e_0, -e_0, +e_1, -e_1, ...
    UnitVector direction(std::int64_t i) const
    {
        const auto n = sum_.size();
        const auto slot = static_cast<Eigen::Index>(i % (2 * n));
        const UnitVector e = UnitVector::basis(n, slot / 2);
        return slot % 2 == 0 ? e : -e;
    }

    void add(const UnitVector& dir, double r_tilde)
    {
        Eigen::Index axis = 0;
        dir.coords().cwiseAbs().maxCoeff(&axis);
        sum_[axis] += (dir[axis] > 0.0 ? 1.0 : -1.0) * r_tilde;
        count_[axis] += 1.0;
    }

    /// Axis means; axes without data contribute 0.
    Vector means() const
    {
        Vector m = Vector::Zero(sum_.size());
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m[i] = count_[i] > 0.0 ? sum_[i] / count_[i] : 0.0;
        return m;
    }

    /// Normalized means, or `previous` when the mean vector is zero.
    UnitVector estimate(const UnitVector& previous) const
    {
        auto u = UnitVector::try_normalize(means());
        return u ? *u : previous;
    }

private:
    Vector sum_;
    Vector count_;
};

/// Cycles the 2 n_dim signed axes for all T steps and keeps a running
/// linear-inversion estimate.
template <Environment E, RecordSink S>
void fixed_basis_policy(E& env, std::int64_t T, S&& sink)
{
    const int n = env.n_dim();
    AxisInversion inv(n);
    UnitVector estimate = UnitVector::basis(n, 0);
    for (std::int64_t t = 1; t <= T; ++t) {
        const UnitVector a = inv.direction(t - 1);
        const MeasurementOutcome out = env.sample(a);
        sink(make_record(env, t, a, out, estimate));
        inv.add(a, out.r_tilde);
        estimate = inv.estimate(estimate);
    }
}

enum class ExploreScheme { fixed_basis, random_directions };

struct EtcConfig {
    double alpha = 0.1; ///< Exploration fraction in (0, 1).
    ExploreScheme explore_scheme = ExploreScheme::fixed_basis;

    void validate() const
    {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ConfigError("ETC alpha must lie in (0,1), got " + std::to_string(alpha));
    }

    /// alpha = T^{-1/2}, which balances exploration against commit-phase regret.
    static EtcConfig optimal_for(std::int64_t T)
    {
        return {std::clamp(1.0 / std::sqrt(static_cast<double>(T)), 1e-12, 1.0 - 1e-12), ExploreScheme::fixed_basis};
    }
};

/// Explore-then-commit: ceil(alpha T) exploration steps, then the remaining
/// steps measure along the linear-inversion estimate. `rng` drives the
/// random-direction scheme only.
template <Environment E, RecordSink S>
void etc_policy(E& env, std::int64_t T, const EtcConfig& cfg, Rng& rng, S&& sink)
{
    cfg.validate();
    const int n = env.n_dim();
    const auto explore = std::min<std::int64_t>(T, static_cast<std::int64_t>(std::ceil(cfg.alpha * T - 1e-9)));
    UnitVector estimate = UnitVector::basis(n, 0);
    AxisInversion inv(n);
    Matrix gram = Matrix::Zero(n, n);
    Vector moment = Vector::Zero(n);
    for (std::int64_t t = 1; t <= explore; ++t) {
        const UnitVector a = cfg.explore_scheme == ExploreScheme::fixed_basis ? inv.direction(t - 1) : rng.sphere(n);
        const MeasurementOutcome out = env.sample(a);
        sink(make_record(env, t, a, out, estimate));
        if (cfg.explore_scheme == ExploreScheme::fixed_basis) {
            inv.add(a, out.r_tilde);
            estimate = inv.estimate(estimate);
        } else {
            gram.noalias() += a.coords() * a.coords().transpose();
            moment += out.r_tilde * a.coords();
            const Matrix ridge = gram + 1e-9 * Matrix::Identity(n, n);
            if (auto u = UnitVector::try_normalize(ridge.ldlt().solve(moment)))
                estimate = *u;
        }
    }
    for (std::int64_t t = explore + 1; t <= T; ++t) {
        const MeasurementOutcome out = env.sample(estimate);
        sink(make_record(env, t, estimate, out, estimate));
    }
}

/// Measures along the hidden state every step; a zero-regret control.
template <Environment E, RecordSink S>
void oracle_policy(E& env, std::int64_t T, S&& sink)
{
    const UnitVector theta = env.truth();
    for (std::int64_t t = 1; t <= T; ++t) {
        const MeasurementOutcome out = env.sample(theta);
        sink(make_record(env, t, theta, out, theta));
    }
}

} // namespace psmaqb

#endif
