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

#ifndef PSMAQB_HARNESS_HPP
#define PSMAQB_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "psmaqb/baselines.hpp"
#include "psmaqb/core.hpp"
#include "psmaqb/environments.hpp"
#include "psmaqb/linucb_vvn.hpp"
#include "psmaqb/records.hpp"
#include "psmaqb/rng.hpp"

namespace psmaqb {

enum class PolicyKind { linucb_vvn, etc, fixed_basis, oracle };

inline std::string_view to_string(PolicyKind p)
{
    switch (p) {
    case PolicyKind::linucb_vvn: return "linucb-vvn";
    case PolicyKind::etc: return "etc";
    case PolicyKind::fixed_basis: return "fixed-basis";
    case PolicyKind::oracle: return "oracle";
    }
    return "unknown";
}

inline PolicyKind parse_policy(std::string_view s)
{
    for (auto p : {PolicyKind::linucb_vvn, PolicyKind::etc, PolicyKind::fixed_basis, PolicyKind::oracle}) {
        if (s == to_string(p))
            return p;
    }
    throw ConfigError("unknown policy '" + std::string(s) + "'");
}

/// Geometric grid of measurement indices in [1, T], `per_decade` points per
/// factor of ten, deduplicated after rounding; always ends at T.
inline std::vector<std::int64_t> geometric_checkpoints(std::int64_t T, int per_decade = 40)
{
    std::vector<std::int64_t> out;
    if (T < 1)
        return out;
    for (int j = 0;; ++j) {
        const auto t = static_cast<std::int64_t>(std::llround(std::pow(10.0, static_cast<double>(j) / per_decade)));
        if (t > T)
            break;
        if (out.empty() || out.back() != t)
            out.push_back(t);
    }
    if (out.back() != T)
        out.push_back(T);
    return out;
}

struct ExperimentConfig {
    PolicyKind policy = PolicyKind::linucb_vvn;
    std::int64_t T = 40000;
    std::optional<int> k = 10;                 ///< nullopt: ceil(24 log(Tb^2)).
    int runs = 100;
    std::uint64_t master_seed = 1;
    double lambda0 = 2.0;
    int n_dim = 3;
    NoiseModel noise = NoiseModel::born;
    std::optional<UnitVector> fixed_state;     ///< nullopt: uniform random state per run.
    std::optional<double> alpha;               ///< ETC exploration fraction; nullopt: T^{-1/2}.
    ExploreScheme explore = ExploreScheme::fixed_basis;
    std::optional<double> weight_beta = kDefaultWeightBeta; ///< nullopt: confidence radius.
    std::vector<std::int64_t> checkpoints;     ///< Empty: geometric_checkpoints(T).
    double fit_window = 0.5;                   ///< Fits use checkpoints from this fraction on.
    int threads = 0;                           ///< 0: hardware concurrency.
    std::string out_path;
    bool deterministic = false;

    int resolved_k() const { return k ? *k : theory_k(T, n_dim); }

    LinUcbVvnConfig policy_config() const { return {lambda0, resolved_k(), n_dim, weight_beta}; }

    EtcConfig etc_config() const
    {
        EtcConfig c = alpha ? EtcConfig{*alpha, explore} : EtcConfig::optimal_for(T);
        c.explore_scheme = explore;
        return c;
    }

    std::vector<std::int64_t> resolved_checkpoints() const
    {
        if (checkpoints.empty())
            return geometric_checkpoints(T);
        std::vector<std::int64_t> c = checkpoints;
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        return c;
    }

    void validate() const
    {
        if (runs < 1)
            throw ConfigError("runs must be >= 1");
        if (T < 1)
            throw ConfigError("T must be >= 1");
        if (n_dim < 2)
            throw ConfigError("dim must be >= 2");
        if (fixed_state)
            require_same_dim(fixed_state->dim(), n_dim, "fixed environment state");
        if (noise == NoiseModel::born && !QuantumDims::from_n_dim(n_dim))
            throw ConfigError("born noise needs dim = d^2 - 1");
        if (!(fit_window >= 0.0 && fit_window < 1.0))
            throw ConfigError("fit window must lie in [0,1)");
        const auto cps = resolved_checkpoints();
        if (cps.empty() || cps.front() < 1 || cps.back() > T)
            throw ConfigError("checkpoints must lie in [1, T]");
        if (policy == PolicyKind::linucb_vvn) {
            const LinUcbVvnConfig pc = policy_config();
            pc.validate();
            const std::int64_t batch = 2LL * (n_dim - 1) * pc.k;
            if (T < 2 * batch)
                throw ConfigError("T = " + std::to_string(T) + " covers fewer than two batches of "
                                  + std::to_string(batch) + " measurements");
        }
        if (policy == PolicyKind::etc)
            etc_config().validate();
    }
};

/// Cumulative quantities of one run at one checkpoint.
struct CheckpointValues {
    double regret_q = 0.0;
    double regret_cl = 0.0;
    double regret_folded = 0.0;
    double disturbance = 0.0;
    double disturbance_star = 0.0;
    double infidelity = 0.0;   ///< Of the estimate held at that step.
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double covered = 0.0;      ///< 1, 0, or 0 for policies without a confidence region.
};

struct RunTrace {
    std::uint64_t seed = 0;
    UnitVector state = UnitVector::basis(3, 0);
    std::vector<CheckpointValues> values;
    std::int64_t batches = 0;
    std::int64_t covered_batches = 0;
    std::int64_t variance_overestimated_batches = 0;
    std::int64_t eigen_relation_violations = 0;
    std::vector<double> batch_lambda_max;   ///< LinUCB-VVN only.
};

/// Sink that accumulates cumulative sums and snapshots them at checkpoints.
class CheckpointRecorder {
public:
    explicit CheckpointRecorder(std::span<const std::int64_t> checkpoints) : checkpoints_(checkpoints)
    {
        values_.reserve(checkpoints.size());
    }

    void operator()(const StepRecord& r)
    {
        acc_.regret_q += r.regret_q;
        acc_.regret_cl += r.regret_cl;
        acc_.regret_folded += r.regret_folded;
        acc_.disturbance += r.disturbance;
        acc_.disturbance_star += r.disturbance_star;
        if (next_ < checkpoints_.size() && r.t == checkpoints_[next_]) {
            CheckpointValues v = acc_;
            v.infidelity = r.infidelity;
            v.lambda_min = r.lambda_min;
            v.lambda_max = r.lambda_max;
            v.covered = r.covered > 0 ? 1.0 : 0.0;
            values_.push_back(v);
            ++next_;
        }
    }

    std::vector<CheckpointValues> take() { return std::move(values_); }

private:
    std::span<const std::int64_t> checkpoints_;
    std::vector<CheckpointValues> values_;
    CheckpointValues acc_;
    std::size_t next_ = 0;
};

/// Seeds derived from a run's substream: environment noise, policy randomness, hidden state.
struct RunSeeds {
    std::uint64_t stream, env, policy, state;

    static RunSeeds of(std::uint64_t master, std::uint64_t run)
    {
        const std::uint64_t s = substream_seed(master, run);
        return {s, splitmix64(s ^ 0x1ULL), splitmix64(s ^ 0x2ULL), splitmix64(s ^ 0x3ULL)};
    }
};

/// Plays one seeded episode and returns its checkpoint trace.
inline RunTrace run_episode(const ExperimentConfig& cfg, std::uint64_t run_index,
                            std::span<const std::int64_t> checkpoints)
{
    const RunSeeds seeds = RunSeeds::of(cfg.master_seed, run_index);
    Rng state_rng(seeds.state);
    Rng policy_rng(seeds.policy);
    RunTrace trace;
    trace.seed = seeds.stream;
    trace.state = cfg.fixed_state ? *cfg.fixed_state : random_pure_state(state_rng, cfg.n_dim);
    VanishingVarianceEnv env(trace.state, cfg.noise, seeds.env);
    CheckpointRecorder rec(checkpoints);

    switch (cfg.policy) {
    case PolicyKind::linucb_vvn: {
        LinUcbVvn policy(cfg.policy_config(), policy_rng);
        policy.play(env, cfg.T, rec);
        for (const BatchStats& b : policy.history()) {
            ++trace.batches;
            trace.covered_batches += b.covered ? 1 : 0;
            trace.variance_overestimated_batches += b.variance_overestimated ? 1 : 0;
            trace.eigen_relation_violations += b.eigen_relation_holds ? 0 : 1;
            trace.batch_lambda_max.push_back(b.lambda_max);
        }
        break;
    }
    case PolicyKind::etc:
        etc_policy(env, cfg.T, cfg.etc_config(), policy_rng, rec);
        break;
    case PolicyKind::fixed_basis:
        fixed_basis_policy(env, cfg.T, rec);
        break;
    case PolicyKind::oracle:
        oracle_policy(env, cfg.T, rec);
        break;
    }
    trace.values = rec.take();
    return trace;
}

/// Mean and standard error over runs of one checkpoint column.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

struct AggregateRow {
    std::int64_t t = 0;
    MeanSe regret_q, regret_cl, regret_folded, disturbance, disturbance_star, infidelity, lambda_min, lambda_max,
        coverage;
};

struct AggregateTrace {
    std::vector<AggregateRow> rows;
    std::vector<RunTrace> runs;   ///< Indexed by run number.
    bool degenerate_sample = false; ///< A single run: standard errors are reported as 0.

    std::int64_t total_batches() const { return sum_runs(&RunTrace::batches); }
    std::int64_t covered_batches() const { return sum_runs(&RunTrace::covered_batches); }
    std::int64_t variance_overestimated_batches() const { return sum_runs(&RunTrace::variance_overestimated_batches); }
    std::int64_t eigen_relation_violations() const { return sum_runs(&RunTrace::eigen_relation_violations); }

    std::vector<double> times() const
    {
        std::vector<double> t;
        for (const auto& r : rows)
            t.push_back(static_cast<double>(r.t));
        return t;
    }

private:
    std::int64_t sum_runs(std::int64_t RunTrace::*field) const
    {
        std::int64_t s = 0;
        for (const auto& r : runs)
            s += r.*field;
        return s;
    }
};

inline MeanSe mean_se(std::span<const double> xs)
{
    MeanSe out;
    const auto n = static_cast<double>(xs.size());
    if (xs.empty())
        return out;
    for (double x : xs)
        out.mean += x;
    out.mean /= n;
    if (xs.size() < 2)
        return out;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

/// Deterministic reduction over runs (ordered by run index).
inline AggregateTrace aggregate(std::vector<RunTrace> runs, std::span<const std::int64_t> checkpoints)
{
    AggregateTrace agg;
    agg.degenerate_sample = runs.size() == 1;
    std::vector<double> col(runs.size());
    auto column = [&](std::size_t c, double CheckpointValues::*f) {
        for (std::size_t r = 0; r < runs.size(); ++r)
            col[r] = runs[r].values[c].*f;
        return mean_se(col);
    };
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        AggregateRow row;
        row.t = checkpoints[c];
        row.regret_q = column(c, &CheckpointValues::regret_q);
        row.regret_cl = column(c, &CheckpointValues::regret_cl);
        row.regret_folded = column(c, &CheckpointValues::regret_folded);
        row.disturbance = column(c, &CheckpointValues::disturbance);
        row.disturbance_star = column(c, &CheckpointValues::disturbance_star);
        row.infidelity = column(c, &CheckpointValues::infidelity);
        row.lambda_min = column(c, &CheckpointValues::lambda_min);
        row.lambda_max = column(c, &CheckpointValues::lambda_max);
        row.coverage = column(c, &CheckpointValues::covered);
        agg.rows.push_back(row);
    }
    agg.runs = std::move(runs);
    return agg;
}

/// Runs `cfg.runs` independent episodes on a worker pool and aggregates them
/// at the checkpoints. The result depends only on the configuration.
inline AggregateTrace run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto checkpoints = cfg.resolved_checkpoints();
    std::vector<RunTrace> runs(static_cast<std::size_t>(cfg.runs));
    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(cfg.runs));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int i = next++; i < cfg.runs; i = next++) {
            try {
                runs[static_cast<std::size_t>(i)] = run_episode(cfg, static_cast<std::uint64_t>(i), checkpoints);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = cfg.runs;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return aggregate(std::move(runs), checkpoints);
}

/// Ordinary least-squares line y = slope x + intercept.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;
    double se_intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    std::string model;
};

inline FitResult ols(std::span<const double> x, std::span<const double> y, std::string model)
{
    require_same_dim(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()), "ols");
    const std::size_t n = x.size();
    if (n < 3)
        throw InsufficientData("fit needs at least 3 points, got " + std::to_string(n));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw InsufficientData("fit regressor is constant");
    FitResult f;
    f.points = n;
    f.model = std::move(model);
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ssr += e * e;
    }
    const double sigma2 = ssr / static_cast<double>(n - 2);
    f.se_slope = std::sqrt(sigma2 / sxx);
    f.se_intercept = std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
    f.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return f;
}

/// Index of the first checkpoint inside the fit window.
inline std::size_t window_start(std::size_t n, double fraction)
{
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
}

inline constexpr std::string_view kLog2Model = "log2: regret = m*log(t)^2 + b";
inline constexpr std::string_view kPowerModel =
    "power: log(1-F) = m*log(log(t)/t) + log(b); m is the exponent of (log t / t), "
    "i.e. the negated slope against log(t/log t)";

/// regret(t) = m log^2 t + b over the window of (t, regret) points.
inline FitResult fit_regret_log2(std::span<const double> t, std::span<const double> regret, double window = 0.5)
{
    require_same_dim(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(regret.size()), "fit_regret_log2");
    std::vector<double> x, y;
    for (std::size_t i = window_start(t.size(), window); i < t.size(); ++i) {
        const double l = std::log(t[i]);
        x.push_back(l * l);
        y.push_back(regret[i]);
    }
    return ols(x, y, std::string(kLog2Model));
}

inline FitResult fit_regret_log2(const AggregateTrace& trace, double window = 0.5)
{
    std::vector<double> y;
    for (const auto& r : trace.rows)
        y.push_back(r.regret_q.mean);
    return fit_regret_log2(trace.times(), y, window);
}

/// 1 - F = b (log t / t)^m over the window. Reports m as `slope` and b
/// (= exp(intercept)) as `intercept`, with the delta-method error for b.
/// Points with t < 3 or non-positive infidelity are dropped.
inline FitResult fit_infidelity_power(std::span<const double> t, std::span<const double> infidelity, double window = 0.5,
                                      std::size_t* dropped = nullptr)
{
    require_same_dim(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(infidelity.size()),
                     "fit_infidelity_power");
    std::vector<double> x, y;
    std::size_t skipped = 0;
    for (std::size_t i = window_start(t.size(), window); i < t.size(); ++i) {
        if (t[i] < 3.0 || !(infidelity[i] > 0.0)) {
            ++skipped;
            continue;
        }
        x.push_back(std::log(std::log(t[i]) / t[i]));
        y.push_back(std::log(infidelity[i]));
    }
    if (dropped)
        *dropped = skipped;
    FitResult f = ols(x, y, std::string(kPowerModel));
    f.intercept = std::exp(f.intercept);
    f.se_intercept *= f.intercept;
    return f;
}

inline FitResult fit_infidelity_power(const AggregateTrace& trace, double window = 0.5, std::size_t* dropped = nullptr)
{
    std::vector<double> y;
    for (const auto& r : trace.rows)
        y.push_back(r.infidelity.mean);
    return fit_infidelity_power(trace.times(), y, window, dropped);
}

/// Average-case regret lower bound (d-1) log(T/(d+1)), floored at 0.
inline double lower_bound_curve(double T, int d)
{
    return std::max(0.0, (d - 1.0) * std::log(T / (d + 1.0)));
}

/// Best average fidelity of any tomography from n copies: (n+1)/(n+d).
inline double fidelity_bound_curve(double n, int d) { return (n + 1.0) / (n + d); }

} // namespace psmaqb

#endif
