// Copyright 2026 The fcm-bias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// What-if scenarios: seeded batches of initial stimuli on unprotected
// concepts, batch execution, phi sweeps and bias statistics over the
// protected concepts.

#ifndef FCM_BIAS_SCENARIO_H_
#define FCM_BIAS_SCENARIO_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "fcm_bias/fcm.h"
#include "fcm_bias/weight_matrix.h"

namespace fcm_bias {

enum class Sampling { kUniform, kFixed };

struct ScenarioSpec {
  // Concepts drawn uniformly on (0, 1] (kUniform).
  std::vector<std::string> activated;
  // Explicit values in (0, 1] (kFixed, or pinned alongside kUniform).
  std::map<std::string, double> fixed;
  // When > 0 and `activated` is empty, each vector activates this many
  // unprotected concepts chosen at random.
  std::size_t random_concepts = 0;
  Sampling sampling = Sampling::kUniform;
  std::size_t count = 20;
  std::uint64_t seed = 0;
};

// {"activated": [...], "fixed": {name: value}, "random_concepts": k,
//  "sampling": "uniform"|"fixed", "count": n, "seed": s}
ScenarioSpec ScenarioSpecFromJson(const nlohmann::json& json);
nlohmann::json ScenarioSpecToJson(const ScenarioSpec& spec);
ScenarioSpec LoadScenarioSpec(const std::string& path);

// Throws kUnknownConcept, kProtectedActivation, kOutOfRange or
// kInvalidConfig.
void ValidateScenario(const ScenarioSpec& spec, const WeightMatrix& model);

// Deterministic in `spec.seed`. Non-activated components are 0.
std::vector<Activation> MakeScenarios(const ScenarioSpec& spec, const WeightMatrix& model);

struct ConceptStatistics {
  std::string name;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population standard deviation
  // Terminal activation of every run (including non-converged ones), in
  // scenario order.
  std::vector<double> per_run;
};

struct ConvergenceSummary {
  std::size_t fixed_point = 0;
  std::size_t limit_cycle = 0;
  std::size_t inconclusive = 0;
  std::size_t failed = 0;  // runs that raised an error
};

struct PhiReport {
  double phi = 0.0;
  // Statistics over FixedPoint runs only; all zeros when none converged.
  std::vector<ConceptStatistics> concepts;
  ConvergenceSummary convergence;
  // Max pairwise inf-distance among terminal states of FixedPoint runs.
  double dispersion = 0.0;
  std::vector<std::string> errors;
};

struct BiasReport {
  std::vector<std::string> protected_concepts;
  std::vector<PhiReport> per_phi;
};

// Runs every scenario (in parallel when hardware allows) and reduces in
// scenario order, so the report is bit-identical across thread counts.
PhiReport RunBatch(const std::vector<Activation>& scenarios, const WeightMatrix& w,
                   const ReasoningConfig& config,
                   const std::vector<std::size_t>& protected_concepts);

// Same scenario batch for every phi in `phi_grid`. Throws kInvalidConfig on
// an empty grid or a phi outside [0, 1].
BiasReport PhiSweep(const ScenarioSpec& spec, const WeightMatrix& w,
                    const ReasoningConfig& base_config,
                    const std::vector<double>& phi_grid);

// Group model report: every protected concept of `w` (the group indicators
// after ExpandGroups) at config.phi, sorted by decreasing mean activation.
struct GroupRanking {
  BiasReport report;
  std::vector<std::string> ranking;
};
GroupRanking GroupReport(const WeightMatrix& expanded_model, const ScenarioSpec& spec,
                         const ReasoningConfig& config);

nlohmann::json BiasReportToJson(const BiasReport& report);
// phi,concept,mean,min,max,stddev,dispersion,converged_count
std::string BiasReportToCsv(const BiasReport& report);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw; portable
// across standard libraries, unlike std::uniform_real_distribution.
double UnitInterval(std::uint64_t bits);

}  // namespace fcm_bias

#endif  // FCM_BIAS_SCENARIO_H_
