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

#ifndef PSMAQB_RECORDS_HPP
#define PSMAQB_RECORDS_HPP

#include <concepts>
#include <cstdint>
#include <vector>

#include "psmaqb/bloch_map.hpp"
#include "psmaqb/environments.hpp"

namespace psmaqb {

/// Per-measurement log entry shared by every policy. Quantities that depend
/// on the hidden state are computed for logging only.
struct StepRecord {
    std::int64_t t = 0;      ///< 1-based measurement index.
    std::int64_t batch = 0;  ///< 1-based batch index; 0 outside batches.
    UnitVector action = UnitVector::basis(3, 0);
    int r = 0;
    double r_tilde = 0.0;
    double p = 0.0;                 ///< Born probability of r = 1.
    double regret_q = 0.0;          ///< 1 - p.
    double regret_cl = 0.0;         ///< 1 - <theta, a>.
    double regret_folded = 0.0;     ///< 1 - max(p, 1 - p).
    double disturbance = 0.0;
    double disturbance_star = 0.0;
    double infidelity = 0.0;        ///< 1 - F of the estimate held when measuring.
    double sigma2_hat = 0.0;        ///< 0 when the policy keeps no variance estimate.
    double lambda_min = 0.0;        ///< Design-matrix spectrum; 0 without one.
    double lambda_max = 0.0;
    int covered = -1;               ///< Truth inside the confidence ellipsoid; -1 without one.
};

template <class S>
concept RecordSink = std::invocable<S&, const StepRecord&>;

/// Fills the outcome-derived columns; the environment is pure so lambda_max(rho) = 1.
template <Environment E>
StepRecord make_record(const E& env, std::int64_t t, const UnitVector& action, const MeasurementOutcome& out,
                       const UnitVector& estimate)
{
    StepRecord rec;
    rec.t = t;
    rec.action = action;
    rec.r = out.r;
    rec.r_tilde = out.r_tilde;
    rec.p = out.p;
    rec.regret_q = 1.0 - out.p;
    rec.regret_cl = 1.0 - out.mean;
    rec.regret_folded = bloch::step_regret_folded(1.0, out.p);
    rec.disturbance = bloch::step_disturbance(1.0, out.p);
    rec.disturbance_star = bloch::step_disturbance_star(1.0, out.p);
    rec.infidelity = bloch::infidelity_pure(estimate, env.truth(), env.quantum_dim());
    return rec;
}

/// Sink that keeps every record.
struct RecordCollector {
    std::vector<StepRecord> records;
    void operator()(const StepRecord& r) { records.push_back(r); }
};

} // namespace psmaqb

#endif
