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

#ifndef PSMAQB_REPORT_HPP
#define PSMAQB_REPORT_HPP

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "psmaqb/harness.hpp"

#ifndef PSMAQB_BUILD_ID
#define PSMAQB_BUILD_ID "unknown"
#endif

namespace psmaqb {

inline constexpr std::array<std::string_view, 11> kTraceColumns = {
    "t",
    "regret_q_mean",
    "regret_q_se",
    "regret_cl_mean",
    "disturbance_mean",
    "disturbance_star_mean",
    "infidelity_mean",
    "infidelity_se",
    "lambda_min_mean",
    "lambda_max_mean",
    "coverage_rate",
};

inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_trace_csv(std::ostream& os, const AggregateTrace& trace)
{
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i)
        os << (i ? "," : "") << kTraceColumns[i];
    os << '\n';
    for (const AggregateRow& r : trace.rows) {
        os << r.t << ',' << format_double(r.regret_q.mean) << ',' << format_double(r.regret_q.se) << ','
           << format_double(r.regret_cl.mean) << ',' << format_double(r.disturbance.mean) << ','
           << format_double(r.disturbance_star.mean) << ',' << format_double(r.infidelity.mean) << ','
           << format_double(r.infidelity.se) << ',' << format_double(r.lambda_min.mean) << ','
           << format_double(r.lambda_max.mean) << ',' << format_double(r.coverage.mean) << '\n';
    }
}

/// Columns of a trace.csv, keyed by header name.
struct TraceTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name)
                return columns[i];
        }
        throw ConfigError("trace has no column '" + std::string(name) + "'");
    }
};

inline TraceTable read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    TraceTable table;
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path.string() + ": empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            table.header.push_back(cell);
    }
    table.columns.resize(table.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= table.columns.size())
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": too many fields");
            try {
                table.columns[c++].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (c != table.columns.size())
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected "
                          + std::to_string(table.columns.size()) + " fields");
    }
    return table;
}

inline nlohmann::json to_json(const FitResult& f)
{
    return {{"m", f.slope}, {"b", f.intercept}, {"se_m", f.se_slope}, {"se_b", f.se_intercept},
            {"r2", f.r2},   {"points", f.points}, {"model", f.model}};
}

inline nlohmann::json to_json(const ExperimentConfig& cfg)
{
    nlohmann::json j;
    j["policy"] = std::string(to_string(cfg.policy));
    j["T"] = cfg.T;
    j["k"] = cfg.k ? nlohmann::json(*cfg.k) : nlohmann::json("theory");
    j["k_resolved"] = cfg.resolved_k();
    j["runs"] = cfg.runs;
    j["seed"] = cfg.master_seed;
    j["lambda0"] = cfg.lambda0;
    j["dim"] = cfg.n_dim;
    j["noise"] = std::string(to_string(cfg.noise));
    if (cfg.fixed_state) {
        const Vector& c = cfg.fixed_state->coords();
        j["env"] = std::vector<double>(c.data(), c.data() + c.size());
    } else {
        j["env"] = "random";
    }
    if (cfg.policy == PolicyKind::etc) {
        j["alpha"] = cfg.etc_config().alpha;
        j["explore"] = cfg.explore == ExploreScheme::fixed_basis ? "fixed-basis" : "random";
    }
    if (cfg.policy == PolicyKind::linucb_vvn) {
        j["weight_beta"] = cfg.weight_beta ? nlohmann::json(*cfg.weight_beta) : nlohmann::json("theory");
        j["confidence_beta"] = beta(cfg.n_dim, cfg.lambda0).value;
    }
    j["fit_window"] = cfg.fit_window;
    j["deterministic"] = cfg.deterministic;
    return j;
}

struct Fits {
    std::optional<FitResult> regret_log2;
    std::optional<FitResult> infidelity_power;
    std::string regret_log2_error;
    std::string infidelity_power_error;
    std::size_t infidelity_dropped = 0;
};

/// Both fits; a fit that cannot be computed records its reason instead.
inline Fits compute_fits(const AggregateTrace& trace, double window)
{
    Fits f;
    try {
        f.regret_log2 = fit_regret_log2(trace, window);
    } catch (const Error& e) {
        f.regret_log2_error = e.what();
    }
    try {
        f.infidelity_power = fit_infidelity_power(trace, window, &f.infidelity_dropped);
    } catch (const Error& e) {
        f.infidelity_power_error = e.what();
    }
    return f;
}

inline nlohmann::json summary_json(const AggregateTrace& trace, const Fits& fits, const ExperimentConfig& cfg,
                                   std::optional<double> wall_seconds)
{
    nlohmann::json j;
    j["config"] = to_json(cfg);
    nlohmann::json jf;
    jf["regret_log2"] = fits.regret_log2 ? to_json(*fits.regret_log2) : nlohmann::json{{"error", fits.regret_log2_error}};
    jf["infidelity_power"] = fits.infidelity_power ? to_json(*fits.infidelity_power)
                                                   : nlohmann::json{{"error", fits.infidelity_power_error}};
    jf["infidelity_power_dropped_points"] = fits.infidelity_dropped;
    j["fits"] = jf;
    nlohmann::json diag;
    diag["degenerate_sample"] = trace.degenerate_sample;
    diag["checkpoints"] = trace.rows.size();
    if (cfg.policy == PolicyKind::linucb_vvn) {
        const auto batches = trace.total_batches();
        diag["batches"] = batches;
        diag["coverage_rate_batches"] = batches ? static_cast<double>(trace.covered_batches()) / batches : 0.0;
        diag["variance_overestimated_rate"] =
            batches ? static_cast<double>(trace.variance_overestimated_batches()) / batches : 0.0;
        diag["eigen_relation_violations"] = trace.eigen_relation_violations();
    }
    j["diagnostics"] = diag;
    j["build"] = PSMAQB_BUILD_ID;
    if (cfg.deterministic || !wall_seconds) {
        j["wall_clock_seconds"] = nullptr;
        j["timestamp"] = nullptr;
    } else {
        j["wall_clock_seconds"] = *wall_seconds;
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["timestamp"] = buf;
    }
    return j;
}

struct EmittedFiles {
    std::filesystem::path trace_csv;
    std::filesystem::path summary_json;
};

/// Writes <out_dir>/trace.csv and <out_dir>/summary.json.
inline EmittedFiles emit(const AggregateTrace& trace, const Fits& fits, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, std::optional<double> wall_seconds = std::nullopt)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    EmittedFiles files{out_dir / "trace.csv", out_dir / "summary.json"};
    {
        std::ofstream os(files.trace_csv);
        if (!os)
            throw IoError("cannot write " + files.trace_csv.string());
        write_trace_csv(os, trace);
        if (!os)
            throw IoError("write failed for " + files.trace_csv.string());
    }
    {
        std::ofstream os(files.summary_json);
        if (!os)
            throw IoError("cannot write " + files.summary_json.string());
        os << summary_json(trace, fits, cfg, wall_seconds).dump(2) << '\n';
        if (!os)
            throw IoError("write failed for " + files.summary_json.string());
    }
    return files;
}

} // namespace psmaqb

#endif
