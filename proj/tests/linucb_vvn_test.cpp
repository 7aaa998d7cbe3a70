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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "psmaqb/linucb_vvn.hpp"

namespace psmaqb {
namespace {

constexpr double kBetaQubit = 279.0 + 108.0 * 1.7320508075688772;

TEST(Omega, TheoryExample)
{
    DesignMatrix v(2.0, 3);
    EXPECT_NEAR(omega(v, 3, kBetaQubit), 1.0 / (12.0 * kBetaQubit), 1e-15);
    EXPECT_NEAR(omega(v, 3, kBetaQubit), 1.78803e-4, 1e-9);
}

TEST(Omega, SquareRootHomogeneity)
{
    DesignMatrix v(2.0, 3);
    const double base = omega(v, 3, 1.0);
    v.rank_one_update(Vector::Unit(3, 1), 6.0); // lambda_max 2 -> 8
    EXPECT_NEAR(omega(v, 3, 1.0), 2.0 * base, 1e-15);
    EXPECT_NEAR(omega(v, 3, 1.0), std::sqrt(v.lambda_max()) / (12.0 * std::sqrt(2.0)), 1e-15);
}

TEST(Lambda0Min, QubitConstants)
{
    EXPECT_NEAR(lambda0_min(3, kBetaQubit), 2.0, 1e-9);
    const double branch = 1.0 / 3.0 + 1.0 / (2.0 * std::sqrt(6.0) * kBetaQubit);
    EXPECT_NEAR(branch, 0.3338, 1e-4);
    for (int n = 2; n < 12; ++n)
        EXPECT_GE(lambda0_min(n, beta(n, 2.0).value), 2.0);
    EXPECT_GT(lambda0_min(2, 0.05), 2.0);
}

// Oracle: scan batch counts upward and keep the last one whose own
// ceil(24 log(Tb^2)) still fits the budget.
TEST(TheoryK, LargestAffordableBatchCount)
{
    for (std::int64_t T : {1000, 40000, 100000}) {
        int expected = 0;
        for (std::int64_t tb = 1; tb <= T; ++tb) {
            const int k = std::max(1, static_cast<int>(std::ceil(24.0 * std::log(static_cast<double>(tb * tb)))));
            if (4 * k * tb > T)
                break;
            expected = k;
        }
        EXPECT_EQ(theory_k(T, 3), expected) << "T=" << T;
    }
    EXPECT_EQ(batches_for_budget(40000, 3, 10), 1000);
}

TEST(ConfigTest, Validation)
{
    LinUcbVvnConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.weight_beta.reset();
    EXPECT_NO_THROW(cfg.validate());
    cfg.lambda0 = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.k = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SelectActions, FreshMatrixExample)
{
    LinUcbVvn policy({2.0, 10, 3, std::nullopt}, UnitVector::basis(3, 2));
    const auto a = policy.select_actions();
    ASSERT_EQ(a.size(), 4u);
    const double s = 1.0 / std::sqrt(3.0), c = std::sqrt(2.0 / 3.0);
    EXPECT_NEAR(a[0][0], s, 1e-12);
    EXPECT_NEAR(a[0][1], 0.0, 1e-12);
    EXPECT_NEAR(a[0][2], c, 1e-12);
    EXPECT_NEAR(a[1][0], -s, 1e-12);
    EXPECT_NEAR(a[1][2], c, 1e-12);
    EXPECT_NEAR(a[2][1], s, 1e-12);
    EXPECT_NEAR(a[3][1], -s, 1e-12);
    EXPECT_NEAR(a[3][2], c, 1e-12);
    for (const auto& x : a)
        EXPECT_NEAR(x.coords().norm(), 1.0, 1e-12);
}

TEST(SelectActions, ConvergeToEstimateAsLambdaMinGrows)
{
    LinUcbVvn policy({1e8, 1, 3, 1.0}, UnitVector::basis(3, 2));
    for (const auto& a : policy.select_actions())
        EXPECT_GT(a[2], 1.0 - 1e-8);
}

struct CountingEnv {
    PureStateEnv inner;
    int calls = 0;
    MeasurementOutcome sample(const UnitVector& a)
    {
        ++calls;
        return inner.sample(a);
    }
    const UnitVector& truth() const { return inner.truth(); }
    int n_dim() const { return inner.n_dim(); }
    int quantum_dim() const { return inner.quantum_dim(); }
};

TEST(RunBatch, FirstBatchConsumptionAndDesign)
{
    CountingEnv env{PureStateEnv::qubit(UnitVector::of({0.3, 0.4, 0.8}), 3)};
    LinUcbVvn policy({2.0, 10, 3, std::nullopt}, UnitVector::basis(3, 2));
    const auto actions = policy.select_actions();
    RecordCollector rec;
    policy.run_batch(env, rec);
    EXPECT_EQ(env.calls, 40);
    EXPECT_EQ(rec.records.size(), 40u);
    Matrix expected = 2.0 * Matrix::Identity(3, 3);
    for (const auto& a : actions)
        expected += a.coords() * a.coords().transpose();
    EXPECT_TRUE(policy.design().matrix().isApprox(expected, 1e-14));
    for (const auto& r : rec.records) {
        EXPECT_EQ(r.batch, 1);
        EXPECT_DOUBLE_EQ(r.sigma2_hat, 1.0);
    }
    EXPECT_EQ(rec.records.front().t, 1);
    EXPECT_EQ(rec.records.back().t, 40);
}

TEST(RunBatch, SigmaScheduleAfterFirstBatch)
{
    PureStateEnv env = PureStateEnv::qubit(UnitVector::of({0.3, 0.4, 0.8}), 3);
    LinUcbVvn policy({2.0, 4, 3, 0.5}, UnitVector::basis(3, 0));
    RecordCollector rec;
    policy.run_batch(env, rec);
    const double expected = 1.0 / omega(policy.design(), 3, 0.5);
    EXPECT_DOUBLE_EQ(policy.next_sigma2(), expected);
    policy.run_batch(env, rec);
    EXPECT_DOUBLE_EQ(rec.records.back().sigma2_hat, expected);
    EXPECT_DOUBLE_EQ(policy.history()[1].sigma2_hat, expected);
}

TEST(RunBatch, EstimateReplaysMomSelection)
{
    PureStateEnv env = PureStateEnv::qubit(UnitVector::of({-0.2, 0.9, 0.1}), 17);
    LinUcbVvn policy({2.0, 5, 3, 1.0}, UnitVector::basis(3, 1));
    RecordCollector rec;
    for (int b = 0; b < 10; ++b)
        policy.run_batch(env, rec);
    const MomSelection sel = mom_select(policy.bank().estimates(), policy.design());
    EXPECT_EQ(sel.index, policy.mom_index());
    EXPECT_TRUE(sel.estimate.isApprox(policy.wmom_raw()));
    const Estimate e = policy.current_estimate();
    EXPECT_FALSE(e.prior);
    EXPECT_NEAR(e.direction.coords().norm(), 1.0, 1e-12);
    EXPECT_TRUE(e.direction.coords().isApprox(policy.wmom_raw().normalized()));
}

TEST(RunBatch, RegretZeroWhenEveryActionIsTheState)
{
    // With lambda_min huge the perturbation vanishes and every action equals theta.
    const UnitVector theta = UnitVector::basis(3, 2);
    PureStateEnv env = PureStateEnv::qubit(theta, 1);
    LinUcbVvn policy({1e30, 3, 3, 1.0}, theta);
    RecordCollector rec;
    policy.run_batch(env, rec);
    double regret = 0.0;
    for (const auto& r : rec.records)
        regret += r.regret_q;
    EXPECT_EQ(regret, 0.0);
}

TEST(CurrentEstimate, PriorBeforeAnyBatch)
{
    const UnitVector init = UnitVector::of({1, 1, 0});
    LinUcbVvn policy(LinUcbVvnConfig{}, init);
    const Estimate e = policy.current_estimate();
    EXPECT_TRUE(e.prior);
    EXPECT_EQ(e.direction, init);
}

TEST(Play, LongRunInvariants)
{
    const UnitVector theta = UnitVector::of({0.6, -0.1, 0.5});
    PureStateEnv env = PureStateEnv::qubit(theta, 2);
    Rng rng(8);
    LinUcbVvn policy(LinUcbVvnConfig{}, rng);
    RecordCollector rec;
    policy.play(env, 20007, rec);
    EXPECT_EQ(rec.records.size(), 20007u);
    EXPECT_EQ(policy.batch_index(), 500);
    EXPECT_EQ(rec.records.back().batch, 0);
    for (const auto& b : policy.history())
        EXPECT_TRUE(b.eigen_relation_holds);
    // Both estimate modes are close to the truth and to each other.
    const double width = std::sqrt(policy.confidence_beta().value / policy.design().lambda_min());
    const Estimate w = policy.current_estimate(EstimateMode::wmom);
    const Estimate a = policy.current_estimate(EstimateMode::action);
    EXPECT_LE((w.direction.coords() - a.direction.coords()).norm(), width);
    EXPECT_LT(bloch::infidelity_pure(w.direction, theta), 1e-2);
}

TEST(Play, Deterministic)
{
    auto stream = [] {
        PureStateEnv env = PureStateEnv::qubit(UnitVector::of({0.1, 0.2, -0.9}), 5);
        Rng rng(6);
        LinUcbVvn policy(LinUcbVvnConfig{}, rng);
        RecordCollector rec;
        policy.play(env, 4000, rec);
        return rec.records;
    };
    const auto a = stream(), b = stream();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].action, b[i].action);
        ASSERT_EQ(a[i].r, b[i].r);
        ASSERT_EQ(a[i].infidelity, b[i].infidelity);
    }
}

TEST(Play, PerBatchRegretDecays)
{
    const UnitVector theta = UnitVector::of({0.3, 0.3, -0.9});
    PureStateEnv env = PureStateEnv::qubit(theta, 12);
    Rng rng(13);
    LinUcbVvn policy(LinUcbVvnConfig{}, rng);
    std::vector<double> per_batch;
    policy.play(env, 40000, [&](const StepRecord& r) {
        if (r.batch == 0)
            return;
        if (per_batch.size() < static_cast<std::size_t>(r.batch))
            per_batch.push_back(0.0);
        per_batch.back() += r.regret_q;
    });
    ASSERT_EQ(per_batch.size(), 1000u);
    double previous = 1e300;
    for (std::size_t w = 0; w + 50 <= per_batch.size(); w += 50) {
        double mean = 0.0;
        for (std::size_t i = w; i < w + 50; ++i)
            mean += per_batch[i] / 50.0;
        EXPECT_LE(mean, previous * 1.05) << "window starting at batch " << w + 1;
        previous = mean;
    }
}

TEST(Play, GaussianSyntheticDimension)
{
    const UnitVector theta = UnitVector::of({0.5, 0.5, 0.5, -0.5, 0.0});
    VanishingVarianceEnv env(theta, NoiseModel::gaussian, 4);
    Rng rng(3);
    LinUcbVvn policy({2.0, 10, 5, 1.0}, rng);
    RecordCollector rec;
    policy.play(env, 16000, rec);
    EXPECT_LT(1.0 - policy.current_estimate().direction.dot(theta), 0.01);
}

} // namespace
} // namespace psmaqb
