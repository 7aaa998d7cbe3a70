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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "psmaqb/harness.hpp"

namespace psmaqb {
namespace {

ExperimentConfig small(PolicyKind p, std::int64_t T = 2000, int runs = 8)
{
    ExperimentConfig cfg;
    cfg.policy = p;
    cfg.T = T;
    cfg.runs = runs;
    return cfg;
}

TEST(Checkpoints, GeometricGrid)
{
    const auto c = geometric_checkpoints(40000);
    EXPECT_EQ(c.front(), 1);
    EXPECT_EQ(c.back(), 40000);
    for (std::size_t i = 1; i < c.size(); ++i)
        EXPECT_LT(c[i - 1], c[i]);
    // Roughly 40 per decade once rounding stops merging points.
    std::size_t in_last_decade = 0;
    for (auto t : c)
        in_last_decade += (t > 4000) ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(in_last_decade), 40.0, 1.0);
}

TEST(ConfigValidation, Rejections)
{
    ExperimentConfig cfg;
    cfg.runs = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.T = 79; // fewer than two batches of 40
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.T = 80;
    EXPECT_NO_THROW(cfg.validate());
    cfg = {};
    cfg.n_dim = 5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.noise = NoiseModel::gaussian;
    EXPECT_NO_THROW(cfg.validate());
    cfg = {};
    cfg.lambda0 = 1.0;
    cfg.weight_beta.reset();
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.fixed_state = UnitVector::basis(4, 0);
    EXPECT_THROW(cfg.validate(), DimensionMismatch);
    cfg = {};
    cfg.policy = PolicyKind::etc;
    cfg.alpha = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(parse_policy("ucb"), ConfigError);
    EXPECT_EQ(parse_policy("fixed-basis"), PolicyKind::fixed_basis);
}

TEST(RunExperiment, OracleHasZeroRegret)
{
    const AggregateTrace trace = run_experiment(small(PolicyKind::oracle));
    for (const auto& row : trace.rows) {
        EXPECT_EQ(row.regret_q.mean, 0.0);
        EXPECT_EQ(row.regret_q.se, 0.0);
    }
}

TEST(RunExperiment, SingleRunIsDegenerate)
{
    const AggregateTrace trace = run_experiment(small(PolicyKind::linucb_vvn, 2000, 1));
    EXPECT_TRUE(trace.degenerate_sample);
    for (const auto& row : trace.rows)
        EXPECT_EQ(row.regret_q.se, 0.0);
}

TEST(RunExperiment, IndependentOfThreadCount)
{
    ExperimentConfig cfg = small(PolicyKind::linucb_vvn, 4000, 6);
    cfg.threads = 1;
    const AggregateTrace a = run_experiment(cfg);
    cfg.threads = 4;
    const AggregateTrace b = run_experiment(cfg);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].regret_q.mean, b.rows[i].regret_q.mean);
        EXPECT_EQ(a.rows[i].infidelity.mean, b.rows[i].infidelity.mean);
    }
}

TEST(RunExperiment, FixedEnvironmentIsUsed)
{
    ExperimentConfig cfg = small(PolicyKind::oracle, 100, 3);
    cfg.fixed_state = UnitVector::of({0.0, 1.0, 1.0});
    const AggregateTrace trace = run_experiment(cfg);
    for (const auto& run : trace.runs)
        EXPECT_EQ(run.state, *cfg.fixed_state);
}

TEST(RunExperiment, RegretMonotoneAndFinite)
{
    for (PolicyKind p : {PolicyKind::linucb_vvn, PolicyKind::etc, PolicyKind::fixed_basis}) {
        const AggregateTrace trace = run_experiment(small(p));
        for (const auto& run : trace.runs) {
            for (std::size_t i = 1; i < run.values.size(); ++i) {
                EXPECT_GE(run.values[i].regret_q, run.values[i - 1].regret_q);
                EXPECT_GE(run.values[i].regret_cl, run.values[i - 1].regret_cl);
            }
        }
        for (std::size_t i = 0; i < trace.rows.size(); ++i) {
            const auto& r = trace.rows[i];
            EXPECT_TRUE(std::isfinite(r.regret_q.mean));
            EXPECT_GE(r.regret_q.se, 0.0);
            EXPECT_GE(r.infidelity.se, 0.0);
            if (i > 0) {
                EXPECT_GE(r.regret_q.mean, trace.rows[i - 1].regret_q.mean);
            }
        }
    }
}

TEST(RunExperiment, QuantumRegretIsHalfClassical)
{
    const AggregateTrace trace = run_experiment(small(PolicyKind::linucb_vvn));
    for (const auto& r : trace.rows)
        EXPECT_NEAR(r.regret_q.mean, 0.5 * r.regret_cl.mean, 1e-9 * (1.0 + r.regret_cl.mean));
}

TEST(RunExperiment, SandwichOnAggregatedCheckpoints)
{
    for (PolicyKind p : {PolicyKind::linucb_vvn, PolicyKind::etc, PolicyKind::fixed_basis}) {
        const AggregateTrace trace = run_experiment(small(p));
        for (const auto& r : trace.rows) {
            EXPECT_LE(r.disturbance.mean, 2.0 * r.regret_q.mean + 1e-9);
            EXPECT_LE(r.regret_folded.mean, r.disturbance_star.mean + 1e-9);
            EXPECT_LE(r.disturbance_star.mean, 2.0 * r.regret_q.mean + 1e-9);
        }
    }
}

TEST(MeanSeTest, Values)
{
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const MeanSe m = mean_se(xs);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Fits, Log2ExactRecovery)
{
    std::vector<double> t, y;
    for (auto c : geometric_checkpoints(40000)) {
        const double l = std::log(static_cast<double>(c));
        t.push_back(static_cast<double>(c));
        y.push_back(3.0 * l * l + 1.0);
    }
    const FitResult f = fit_regret_log2(t, y);
    EXPECT_NEAR(f.slope, 3.0, 1e-10);
    EXPECT_NEAR(f.intercept, 1.0, 1e-8);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.model, kLog2Model);
}

TEST(Fits, PowerExactRecovery)
{
    std::vector<double> t, y;
    for (auto c : geometric_checkpoints(40000)) {
        const double x = static_cast<double>(c);
        t.push_back(x);
        y.push_back(x >= 3 ? 0.1 * std::log(x) / x : 0.0);
    }
    const FitResult f = fit_infidelity_power(t, y);
    EXPECT_NEAR(f.slope, 1.0, 1e-10);
    EXPECT_NEAR(f.intercept, 0.1, 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Fits, PowerDropsNonPositive)
{
    std::vector<double> t{10, 20, 40, 80, 160, 320}, y{0.0, 0.1, -1.0, 0.02, 0.01, 0.005};
    std::size_t dropped = 0;
    const FitResult f = fit_infidelity_power(t, y, 0.0, &dropped);
    EXPECT_EQ(dropped, 2u);
    EXPECT_EQ(f.points, 4u);
}

TEST(Fits, InsufficientData)
{
    std::vector<double> t{10, 100}, y{1, 2};
    EXPECT_THROW(fit_regret_log2(t, y, 0.0), InsufficientData);
    std::vector<double> t3{10, 10, 10}, y3{1, 2, 3};
    EXPECT_THROW(fit_regret_log2(t3, y3, 0.0), InsufficientData);
}

TEST(Fits, NoisyR2InRange)
{
    Rng r(4);
    std::vector<double> t, y;
    for (int i = 1; i <= 100; ++i) {
        t.push_back(10.0 * i);
        y.push_back(r.normal());
    }
    const FitResult f = fit_regret_log2(t, y, 0.0);
    EXPECT_GE(f.r2, 0.0);
    EXPECT_LE(f.r2, 1.0);
}

TEST(Curves, LowerBound)
{
    EXPECT_DOUBLE_EQ(lower_bound_curve(3.0, 2), 0.0);
    EXPECT_DOUBLE_EQ(lower_bound_curve(1.0, 2), 0.0);
    EXPECT_NEAR(lower_bound_curve(300.0, 2), 4.6052, 1e-4);
    EXPECT_NEAR(lower_bound_curve(300.0, 4), 12.283, 1e-3);
}

TEST(Curves, FidelityBound)
{
    EXPECT_DOUBLE_EQ(fidelity_bound_curve(1.0, 2), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(fidelity_bound_curve(0.0, 2), 0.5);
    double prev = 0.0;
    for (double n = 0; n < 1e6; n = 2 * n + 1) {
        const double f = fidelity_bound_curve(n, 2);
        EXPECT_GT(f, prev);
        EXPECT_LT(f, 1.0);
        prev = f;
    }
    EXPECT_NEAR(fidelity_bound_curve(1e12, 2), 1.0, 1e-11);
}

TEST(RunSeedsTest, DistinctStreams)
{
    const RunSeeds a = RunSeeds::of(1, 0), b = RunSeeds::of(1, 1);
    EXPECT_NE(a.env, a.policy);
    EXPECT_NE(a.env, a.state);
    EXPECT_NE(a.env, b.env);
    EXPECT_EQ(a.stream, substream_seed(1, 0));
}

} // namespace
} // namespace psmaqb
