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

// Serialization shared by the command line and the HTTP service. Both front
// ends go through these writers, so a response body and the matching CLI
// output file are the same bytes.

#ifndef FCM_BIAS_IO_H_
#define FCM_BIAS_IO_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fcm_bias/correlation.h"
#include "fcm_bias/fcm.h"
#include "fcm_bias/ingest.h"
#include "fcm_bias/weight_matrix.h"

namespace fcm_bias {

// Two-space indented JSON followed by a newline.
std::string DumpJson(const nlohmann::json& json);

// Ingest, group expansion (when the schema declares any), normalization and
// weight estimation in one call.
struct BuildRequest {
  LoadOptions load;
  BuildOptions build;
};
CorrelationModel BuildModel(std::string_view csv_text, const FeatureSchema& schema,
                            const BuildRequest& request = {});

// {"diagonal": "zero"|"one", "missing": "drop"|"strict", "delimiter": ","}
BuildRequest BuildRequestFromJson(const nlohmann::json& json);

// {"phi", "iters", "transfer", "lambda", "epsilon", "cyclePeriodMax"}; keys
// absent from `json` keep the value in `base`. Throws kInvalidConfig.
ReasoningConfig ReasoningConfigFromJson(const nlohmann::json& json,
                                        const ReasoningConfig& base = {});
nlohmann::json ReasoningConfigToJson(const ReasoningConfig& config);

nlohmann::json TerminalToJson(const TerminalState& terminal);

// Initial vector from either {concept: value} or a full array of M values.
// Throws kUnknownConcept, kProtectedActivation (nonzero value on a protected
// concept), kOutOfRange (value outside [0,1]) or kDimensionMismatch.
Activation ActivationFromJson(const nlohmann::json& json, const WeightMatrix& w);

// {"config", "conceptNames", "trace": [[...], ...], "terminal",
//  "protectedActivations": {name: value}}
nlohmann::json SimulationToJson(const SimulationTrace& trace, const WeightMatrix& w,
                                const ReasoningConfig& config);
// iteration,concept,value
std::string TraceToCsv(const SimulationTrace& trace, const WeightMatrix& w);

// Correlation of every concept with each protected concept, two decimals,
// '*' when significant. Self entries read "1.00*".
std::string CorrelationTableCsv(const WeightMatrix& w);

// POST /models body and the CLI build summary.
nlohmann::json ModelSummaryToJson(const std::string& model_id, const CorrelationModel& model);

struct EigenReport {
  EigenResult eigen;
  // inf-distance between v and the phi = 1 terminal state from a random
  // positive start; NaN when that run did not reach a fixed point.
  double cross_check_distance = 0.0;
  TerminalKind cross_check_terminal = TerminalKind::kInconclusive;
};
EigenReport ComputeEigenReport(const WeightMatrix& w, double tol, int max_iterations,
                               std::uint64_t seed);
nlohmann::json EigenReportToJson(const EigenReport& report, const WeightMatrix& w);

// 64-bit FNV-1a rendered as 16 lowercase hex digits.
std::string ContentHash(std::string_view bytes);

}  // namespace fcm_bias

#endif  // FCM_BIAS_IO_H_
