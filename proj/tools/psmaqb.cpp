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

// psmaqb: run seeded bandit experiments and fit their traces.
//
//   psmaqb run --policy linucb-vvn --T 40000 --k 10 --runs 100 --out out/
//   psmaqb fit --in out/trace.csv --model log2

#include <chrono>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psmaqb/harness.hpp"
#include "psmaqb/report.hpp"

namespace {

using namespace psmaqb;

std::optional<UnitVector> parse_env(const std::string& arg)
{
    if (arg == "random")
        return std::nullopt;
    const std::string prefix = "fixed:";
    if (arg.rfind(prefix, 0) != 0)
        throw ConfigError("--env expects 'random' or 'fixed:<x,y,z>', got '" + arg + "'");
    std::vector<double> coords;
    std::stringstream ss(arg.substr(prefix.size()));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            coords.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("bad coordinate '" + cell + "' in --env");
        }
    }
    if (coords.size() < 2)
        throw ConfigError("--env fixed state needs at least two coordinates");
    return UnitVector::normalize(Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size())));
}

std::optional<int> parse_k(const std::string& s)
{
    if (s == "theory")
        return std::nullopt;
    try {
        std::size_t pos = 0;
        const int k = std::stoi(s, &pos);
        if (pos != s.size() || k < 1)
            throw std::invalid_argument(s);
        return k;
    } catch (const std::exception&) {
        throw ConfigError("--k expects a positive integer or 'theory', got '" + s + "'");
    }
}

std::optional<double> parse_weight_beta(const std::string& s)
{
    if (s == "theory")
        return std::nullopt;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ConfigError("--weight-beta expects a number or 'theory', got '" + s + "'");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Minimally disturbing online learning of pure qubit states"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run seeded episodes and write trace.csv and summary.json");
    std::string policy = "linucb-vvn", k_str = "10", noise = "born", env_spec = "random", weight_beta_str;
    std::string out_dir = "out";
    std::int64_t T = 40000;
    int runs = 100, dim = 3, threads = 0;
    std::uint64_t seed = 1;
    double lambda0 = 2.0, window = 0.5;
    std::optional<double> alpha;
    std::string explore = "fixed-basis";
    bool deterministic = false;
    run->add_option("--policy", policy, "linucb-vvn | etc | fixed-basis | oracle")
        ->check(CLI::IsMember({"linucb-vvn", "etc", "fixed-basis", "oracle"}))
        ->capture_default_str();
    run->add_option("--T", T, "Total measurement budget")->capture_default_str();
    run->add_option("--k", k_str, "Subsamples per action, or 'theory' for ceil(24 log(Tb^2))")->capture_default_str();
    run->add_option("--runs", runs, "Independent episodes")->capture_default_str();
    run->add_option("--seed", seed, "Master seed")->capture_default_str();
    run->add_option("--lambda0", lambda0, "Design-matrix regularization")->capture_default_str();
    run->add_option("--dim", dim, "Classical dimension (3 for qubits)")->capture_default_str();
    run->add_option("--noise", noise, "born | gaussian")->check(CLI::IsMember({"born", "gaussian"}))->capture_default_str();
    run->add_option("--env", env_spec, "random | fixed:<x,y,z>")->capture_default_str();
    run->add_option("--alpha", alpha, "ETC exploration fraction (default T^-1/2)");
    run->add_option("--explore", explore, "ETC exploration: fixed-basis | random")
        ->check(CLI::IsMember({"fixed-basis", "random"}))
        ->capture_default_str();
    run->add_option("--weight-beta", weight_beta_str,
                    "Constant in the batch weight rule, or 'theory' for the confidence radius (default 0.36)");
    run->add_option("--fit-window", window, "Fraction of leading checkpoints excluded from fits")->capture_default_str();
    run->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_flag("--deterministic", deterministic, "Suppress wall-clock fields in summary.json");

    auto* fit = app.add_subcommand("fit", "Fit a trace.csv and print the result as JSON");
    std::string in_path, model = "log2";
    double fit_window = 0.5;
    fit->add_option("--in", in_path, "trace.csv to read")->required();
    fit->add_option("--model", model, "log2 | power")->check(CLI::IsMember({"log2", "power"}))->capture_default_str();
    fit->add_option("--window", fit_window, "Fraction of leading rows excluded")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig cfg;
            cfg.policy = parse_policy(policy);
            cfg.T = T;
            cfg.k = parse_k(k_str);
            cfg.runs = runs;
            cfg.master_seed = seed;
            cfg.lambda0 = lambda0;
            cfg.n_dim = dim;
            cfg.noise = parse_noise_model(noise);
            cfg.fixed_state = parse_env(env_spec);
            cfg.alpha = alpha;
            cfg.explore = explore == "random" ? ExploreScheme::random_directions : ExploreScheme::fixed_basis;
            if (!weight_beta_str.empty())
                cfg.weight_beta = parse_weight_beta(weight_beta_str);
            cfg.fit_window = window;
            cfg.threads = threads;
            cfg.out_path = out_dir;
            cfg.deterministic = deterministic;

            const auto start = std::chrono::steady_clock::now();
            const AggregateTrace trace = run_experiment(cfg);
            const Fits fits = compute_fits(trace, cfg.fit_window);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const EmittedFiles files = emit(trace, fits, cfg, out_dir, secs);
            std::cout << files.trace_csv.string() << '\n' << files.summary_json.string() << '\n';
        } else if (*fit) {
            const TraceTable table = read_trace_csv(in_path);
            const auto& t = table.column("t");
            FitResult f = model == "log2" ? fit_regret_log2(t, table.column("regret_q_mean"), fit_window)
                                          : fit_infidelity_power(t, table.column("infidelity_mean"), fit_window);
            std::cout << to_json(f).dump(2) << '\n';
        }
    } catch (const psmaqb::Error& e) {
        std::cerr << "psmaqb: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
