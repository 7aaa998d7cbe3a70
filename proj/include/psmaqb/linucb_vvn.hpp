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

#ifndef PSMAQB_LINUCB_VVN_HPP
#define PSMAQB_LINUCB_VVN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psmaqb/core.hpp"
#include "psmaqb/environments.hpp"
#include "psmaqb/estimator.hpp"
#include "psmaqb/records.hpp"
#include "psmaqb/rng.hpp"

namespace psmaqb {

/// Batch weight omega(V) = sqrt(lambda_max(V)) / (12 sqrt(n_dim - 1) beta).
inline double omega(const DesignMatrix& v, int n_dim, double beta)
{
    return std::sqrt(v.lambda_max()) / (12.0 * std::sqrt(n_dim - 1.0) * beta);
}

/// Smallest admissible lambda0 for the weight rule with constant `beta`:
/// max{2, 2 sqrt(2/(3(n-1))) n / (12 sqrt(n-1) beta) + 2/(3(n-1))}.
inline double lambda0_min(int n_dim, double beta)
{
    const double m = n_dim - 1.0;
    const double branch = 2.0 * std::sqrt(2.0 / (3.0 * m)) * n_dim / (12.0 * std::sqrt(m) * beta) + 2.0 / (3.0 * m);
    return std::max(2.0, branch);
}

/// Number of full batches a budget of T measurements buys.
inline std::int64_t batches_for_budget(std::int64_t T, int n_dim, int k)
{
    return T / (2LL * (n_dim - 1) * k);
}

/// Subsample count ceil(24 log(Tb^2)) for the largest batch count Tb that the
/// budget T still covers with that k (at least 1).
inline int theory_k(std::int64_t T, int n_dim)
{
    auto k_of = [](std::int64_t tb) {
        const double v = std::ceil(24.0 * std::log(static_cast<double>(tb) * static_cast<double>(tb)) - 1e-12);
        return std::max(1, static_cast<int>(v));
    };
    auto cost = [&](std::int64_t tb) { return 2.0 * (n_dim - 1) * k_of(tb) * static_cast<double>(tb); };
    std::int64_t lo = 1, hi = std::max<std::int64_t>(1, T);
    if (cost(lo) > static_cast<double>(T))
        return k_of(lo);
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (cost(mid) <= static_cast<double>(T))
            lo = mid;
        else
            hi = mid - 1;
    }
    return k_of(lo);
}

/// Default constant inside omega. The confidence radius beta(n_dim, lambda0)
/// makes the batch weights ~1e-4 at n_dim = 3, which keeps the design matrix
/// and the regret rate in the linear regime for any laptop-scale horizon.
/// 0.36 gives a log^2 regret slope near 2 at T = 4e4 with k = 10.
inline constexpr double kDefaultWeightBeta = 0.36;

struct LinUcbVvnConfig {
    double lambda0 = 2.0;
    int k = 10;
    int n_dim = 3;
    /// Constant inside omega; nullopt selects the confidence radius beta(n_dim, lambda0).
    std::optional<double> weight_beta = kDefaultWeightBeta;

    double resolved_weight_beta() const { return weight_beta ? *weight_beta : beta(n_dim, lambda0).value; }

    void validate() const
    {
        if (n_dim < 2)
            throw ConfigError("LinUCB-VVN needs n_dim >= 2");
        if (k < 1)
            throw ConfigError("LinUCB-VVN needs k >= 1");
        const double wb = resolved_weight_beta();
        if (!(wb > 0.0) || !std::isfinite(wb))
            throw ConfigError("weight beta must be positive");
        const double floor = lambda0_min(n_dim, wb);
        if (!(lambda0 >= floor - 1e-12))
            throw ConfigError("lambda0 = " + std::to_string(lambda0) + " below the admissible minimum "
                              + std::to_string(floor));
    }
};

/// Per-batch diagnostics.
struct BatchStats {
    double lambda_min = 0.0;     ///< Of V after the batch.
    double lambda_max = 0.0;
    double sigma2_hat = 0.0;     ///< Variance estimate applied to the batch.
    bool covered = false;        ///< ||theta - theta_wmom||^2_V <= beta after the batch.
    bool variance_overestimated = false; ///< Every action's true variance <= sigma2_hat.
    bool eigen_relation_holds = false;   ///< lambda_min >= sqrt(2/(3(n-1)) lambda_max).
};

enum class EstimateMode { wmom, action };

struct Estimate {
    UnitVector direction;
    bool prior = false; ///< No batch finished yet; `direction` is the random initial guess.
};

/// Optimistic batch policy for linear bandits with vanishing-variance noise.
///
/// Each batch plays the 2(n_dim-1) directions obtained by pushing the current
/// median-of-means estimate along the n_dim-1 least-explored eigenvectors of
/// the design matrix, by 1/sqrt(lambda_min), in both signs. Every direction is
/// sampled k times; subsample j feeds the j-th least-squares estimator.
class LinUcbVvn {
public:
    LinUcbVvn(LinUcbVvnConfig cfg, UnitVector initial_estimate)
        : cfg_(cfg), bank_(cfg.k, cfg.lambda0, cfg.n_dim), theta_hat_(std::move(initial_estimate)),
          beta_(beta(cfg.n_dim, cfg.lambda0)), weight_beta_(cfg.resolved_weight_beta()),
          wmom_(Vector::Zero(cfg.n_dim))
    {
        cfg_.validate();
        require_same_dim(theta_hat_.dim(), cfg_.n_dim, "LinUcbVvn initial estimate");
    }

    /// Draws the initial estimate uniformly on the sphere.
    LinUcbVvn(LinUcbVvnConfig cfg, Rng& rng) : LinUcbVvn(cfg, rng.sphere(cfg.n_dim)) {}

    /// Directions for the next batch, ordered a+_1, a-_1, a+_2, a-_2, ...
    std::vector<UnitVector> select_actions() const
    {
        const DesignMatrix& v = bank_.design();
        const Matrix& vecs = v.eigenvectors();
        const double step = 1.0 / std::sqrt(v.lambda_min());
        std::vector<UnitVector> out;
        out.reserve(static_cast<std::size_t>(2 * (cfg_.n_dim - 1)));
        for (int i = 0; i < cfg_.n_dim - 1; ++i) {
            for (double sign : {1.0, -1.0}) {
                const Vector raw = theta_hat_.coords() + sign * step * vecs.col(i);
                if (raw.norm() < 1e-6)
                    throw InvariantViolation("perturbed action collapsed to zero");
                out.push_back(UnitVector::normalize(raw));
            }
        }
        return out;
    }

    /// Variance estimate for the next batch: 1 for the first, 1/omega(V) after.
    double next_sigma2() const
    {
        return batch_ == 0 ? 1.0 : 1.0 / omega(bank_.design(), cfg_.n_dim, weight_beta_);
    }

    /// Plays one batch of 2(n_dim-1) k measurements, emitting a record per
    /// measurement in sampling order (for each i and j: a+_i then a-_i).
    template <Environment E, RecordSink S>
    void run_batch(E& env, S&& sink)
    {
        require_same_dim(env.n_dim(), cfg_.n_dim, "LinUcbVvn::run_batch");
        const auto actions = select_actions();
        const double sigma2 = next_sigma2();
        const double inv_sigma2 = 1.0 / sigma2;
        const std::int64_t batch = batch_ + 1;
        const DesignMatrix& v = bank_.design();
        const double lmin = v.lambda_min();
        const double lmax = v.lambda_max();
        const int covered_before = in_confidence(env.truth().coords(), wmom_, v, beta_.value) ? 1 : 0;

        const auto n_actions = actions.size();
        const auto k = static_cast<std::size_t>(cfg_.k);
        std::vector<double> rewards(n_actions * k);
        bool overestimated = true;
        for (std::size_t pair = 0; pair < n_actions; pair += 2) {
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t a = pair; a < pair + 2; ++a) {
                    const MeasurementOutcome out = env.sample(actions[a]);
                    rewards[a * k + j] = out.r_tilde;
                    overestimated = overestimated && out.variance <= sigma2;
                    StepRecord rec = make_record(env, ++steps_, actions[a], out, theta_hat_);
                    rec.batch = batch;
                    rec.sigma2_hat = sigma2;
                    rec.lambda_min = lmin;
                    rec.lambda_max = lmax;
                    rec.covered = covered_before;
                    sink(rec);
                }
            }
        }

        for (std::size_t a = 0; a < n_actions; ++a)
            bank_.update(actions[a].coords(), std::span<const double>(rewards.data() + a * k, k), inv_sigma2);

        MomSelection sel = bank_.select();
        wmom_ = sel.estimate;
        mom_index_ = sel.index;
        if (auto dir = UnitVector::try_normalize(wmom_))
            theta_hat_ = *dir;
        first_action_ = actions.front();
        batch_ = batch;

        BatchStats stats;
        stats.lambda_min = v.lambda_min();
        stats.lambda_max = v.lambda_max();
        stats.sigma2_hat = sigma2;
        stats.covered = in_confidence(env.truth().coords(), wmom_, v, beta_.value);
        stats.variance_overestimated = overestimated;
        stats.eigen_relation_holds = eigen_relation_holds(v);
        history_.push_back(stats);
    }

    /// Runs floor(T / (2(n_dim-1)k)) batches, then spends any remainder
    /// measuring along the current estimate (records with batch = 0).
    template <Environment E, RecordSink S>
    void play(E& env, std::int64_t T, S&& sink)
    {
        const std::int64_t batches = batches_for_budget(T, cfg_.n_dim, cfg_.k);
        for (std::int64_t b = 0; b < batches; ++b)
            run_batch(env, sink);
        const DesignMatrix& v = bank_.design();
        while (steps_ < T) {
            const MeasurementOutcome out = env.sample(theta_hat_);
            StepRecord rec = make_record(env, ++steps_, theta_hat_, out, theta_hat_);
            rec.lambda_min = v.lambda_min();
            rec.lambda_max = v.lambda_max();
            rec.covered = in_confidence(env.truth().coords(), wmom_, v, beta_.value) ? 1 : 0;
            sink(rec);
        }
    }

    /// wmom: the normalized median-of-means estimate. action: a+_1 of the last batch.
    Estimate current_estimate(EstimateMode mode = EstimateMode::wmom) const
    {
        if (batch_ == 0)
            return {theta_hat_, true};
        if (mode == EstimateMode::action)
            return {*first_action_, false};
        return {theta_hat_, false};
    }

    /// lambda_min(V) >= sqrt(2/(3(n-1)) lambda_max(V)), with relative slack 1e-12.
    bool eigen_relation_holds(const DesignMatrix& v) const
    {
        const double bound = std::sqrt(2.0 / (3.0 * (cfg_.n_dim - 1)) * v.lambda_max());
        return v.lambda_min() >= bound * (1.0 - 1e-12);
    }

    const LinUcbVvnConfig& config() const { return cfg_; }
    const DesignMatrix& design() const { return bank_.design(); }
    const EstimatorBank& bank() const { return bank_; }
    const Vector& wmom_raw() const { return wmom_; }
    int mom_index() const { return mom_index_; }
    std::int64_t batch_index() const { return batch_; }
    std::int64_t steps() const { return steps_; }
    const BetaConstant& confidence_beta() const { return beta_; }
    double weight_beta() const { return weight_beta_; }
    const std::vector<BatchStats>& history() const { return history_; }

private:
    LinUcbVvnConfig cfg_;
    EstimatorBank bank_;
    UnitVector theta_hat_;
    BetaConstant beta_;
    double weight_beta_;
    Vector wmom_;
    int mom_index_ = 0;
    std::optional<UnitVector> first_action_;
    std::int64_t batch_ = 0;
    std::int64_t steps_ = 0;
    std::vector<BatchStats> history_;
};

} // namespace psmaqb

#endif
