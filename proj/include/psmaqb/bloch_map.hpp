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

#ifndef PSMAQB_BLOCH_MAP_HPP
#define PSMAQB_BLOCH_MAP_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "psmaqb/core.hpp"

/// Conversions between the quantum picture (Born probabilities, fidelities,
/// post-measurement disturbance) and the linear-bandit picture (unit vectors,
/// inner products, renormalized rewards). All functions are pure.
namespace psmaqb::bloch {

/// Probabilities that overshoot [0, 1] by at most this much are clamped.
inline constexpr double kProbabilitySlack = 1e-9;

/// Tr(Pi_a Pi_theta) = (1 + (d-1) <a, theta>) / d.
inline double trace_overlap(double inner, int d)
{
    const double p = (1.0 + (d - 1) * inner) / d;
    if (p < -kProbabilitySlack || p > 1.0 + kProbabilitySlack)
        throw OutOfRange("trace_overlap: probability " + std::to_string(p) + " outside [0,1] (inner="
                         + std::to_string(inner) + ", d=" + std::to_string(d) + ")");
    return std::clamp(p, 0.0, 1.0);
}

/// Inverse of trace_overlap: <a, theta> = (d tr - 1) / (d - 1).
inline double inner_from_trace(double tr, int d) { return (d * tr - 1.0) / (d - 1); }

/// Maps a Born outcome r in {0, 1} to the unbiased linear reward in {1, -1/(d-1)}.
inline double renormalize_reward(int r, int d) { return (d * r - 1.0) / (d - 1); }

/// 1 - F between pure states with Bloch vectors a and theta in a d-level system.
inline double infidelity_pure(const UnitVector& a, const UnitVector& theta, int d)
{
    require_same_dim(a.dim(), theta.dim(), "infidelity_pure");
    const double v = (d - 1.0) / d * (1.0 - a.dot(theta));
    return std::clamp(v, 0.0, 1.0);
}

/// Qubit shorthand: 1 - F = |theta - a|^2 / 4.
inline double infidelity_pure(const UnitVector& a, const UnitVector& theta)
{
    return infidelity_pure(a, theta, 2);
}

/// Folds a Born probability onto [1/2, 1]; the two outcomes of a projective
/// measurement can always be relabeled so the aligned one is the likelier.
inline double fold_probability(double p) { return std::max(p, 1.0 - p); }

/// Expected infidelity of the observed post-measurement state, in excess of
/// the minimum 2 lmax (1 - lmax): 2 (lmax - p)(lmax + p - 1).
/// `p` is folded onto [1/2, 1] before evaluation.
inline double step_disturbance(double lambda_max, double p)
{
    p = fold_probability(p);
    return std::max(0.0, 2.0 * (lambda_max - p) * (lambda_max + p - 1.0));
}

/// Infidelity 1 - F(rho, rho_t) between a qubit state with top eigenvalue
/// lmax and the averaged post-measurement state p Pi + (1 - p) Pi^c.
inline double step_disturbance_star(double lambda_max, double p)
{
    p = fold_probability(p);
    const double det = std::max(0.0, lambda_max * (1.0 - lambda_max) * p * (1.0 - p));
    const double fidelity = p * p + (1.0 - p) * (1.0 - p) + 2.0 * std::sqrt(det);
    return std::clamp(1.0 - fidelity, 0.0, 1.0);
}

/// Per-step regret lmax - p with the folded probability; the quantity the
/// disturbance sandwich inequalities are stated against.
inline double step_regret_folded(double lambda_max, double p) { return lambda_max - fold_probability(p); }

} // namespace psmaqb::bloch

#endif
