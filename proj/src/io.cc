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

#include "fcm_bias/io.h"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"
#include "fcm_bias/scenario.h"

namespace fcm_bias {
namespace {

using nlohmann::json;

[[noreturn]] void ConfigError(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + what);
}

double NumberField(const json& j, const char* key) {
  if (!j[key].is_number()) ConfigError(key, "expected a number");
  return j[key].get<double>();
}

int IntField(const json& j, const char* key) {
  if (!j[key].is_number_integer()) ConfigError(key, "expected an integer");
  return j[key].get<int>();
}

void CheckInitialValue(const std::string& name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("initial value for '{}' must lie in [0,1], got {}", name, value));
  }
}

}  // namespace

std::string DumpJson(const json& j) { return j.dump(2) + "\n"; }

CorrelationModel BuildModel(std::string_view csv_text, const FeatureSchema& schema,
                            const BuildRequest& request) {
  Dataset data = ParseCsv(csv_text, schema, request.load);
  if (!data.schema.group_expansions.empty()) data = ExpandGroups(data);
  return BuildWeightMatrix(Normalize(data), request.build);
}

BuildRequest BuildRequestFromJson(const json& j) {
  BuildRequest request;
  if (j.is_null()) return request;
  if (!j.is_object()) ConfigError("options", "expected a JSON object");
  if (j.contains("diagonal")) {
    const std::string d = j["diagonal"].is_string() ? j["diagonal"].get<std::string>() : "";
    if (d == "zero") {
      request.build.diagonal = Diagonal::kZero;
    } else if (d == "one") {
      request.build.diagonal = Diagonal::kOne;
    } else {
      ConfigError("options.diagonal", "expected \"zero\" or \"one\"");
    }
  }
  if (j.contains("missing")) {
    const std::string m = j["missing"].is_string() ? j["missing"].get<std::string>() : "";
    if (m == "drop") {
      request.load.missing = MissingPolicy::kDrop;
    } else if (m == "strict") {
      request.load.missing = MissingPolicy::kStrict;
    } else {
      ConfigError("options.missing", "expected \"drop\" or \"strict\"");
    }
  }
  if (j.contains("delimiter")) {
    if (!j["delimiter"].is_string() || j["delimiter"].get<std::string>().size() != 1) {
      ConfigError("options.delimiter", "expected a single character");
    }
    request.load.delimiter = j["delimiter"].get<std::string>()[0];
  }
  return request;
}

ReasoningConfig ReasoningConfigFromJson(const json& j, const ReasoningConfig& base) {
  ReasoningConfig config = base;
  if (j.is_null()) return config;
  if (!j.is_object()) ConfigError("config", "expected a JSON object");
  if (j.contains("phi")) config.phi = NumberField(j, "phi");
  if (j.contains("iters")) config.max_iterations = IntField(j, "iters");
  if (j.contains("transfer")) {
    if (!j["transfer"].is_string()) ConfigError("transfer", "expected a string");
    config.transfer.kind = ParseTransferKind(j["transfer"].get<std::string>());
  }
  if (j.contains("lambda")) config.transfer.lambda = NumberField(j, "lambda");
  if (j.contains("epsilon")) config.epsilon = NumberField(j, "epsilon");
  if (j.contains("cyclePeriodMax")) config.cycle_period_max = IntField(j, "cyclePeriodMax");
  config.Validate();
  return config;
}

json ReasoningConfigToJson(const ReasoningConfig& config) {
  return {{"phi", config.phi},
          {"iters", config.max_iterations},
          {"transfer", TransferKindName(config.transfer.kind)},
          {"lambda", config.transfer.lambda},
          {"epsilon", config.epsilon},
          {"cyclePeriodMax", config.EffectiveCyclePeriodMax()}};
}

json TerminalToJson(const TerminalState& terminal) {
  json j = {{"kind", TerminalKindName(terminal.kind)}};
  switch (terminal.kind) {
    case TerminalKind::kFixedPoint:
      j["atIteration"] = terminal.fixed_point.at_iteration;
      break;
    case TerminalKind::kLimitCycle:
      j["period"] = terminal.limit_cycle.period;
      j["fromIteration"] = terminal.limit_cycle.from_iteration;
      break;
    case TerminalKind::kInconclusive: break;
  }
  return j;
}

Activation ActivationFromJson(const json& j, const WeightMatrix& w) {
  Activation a(w.size(), 0.0);
  if (j.is_array()) {
    if (j.size() != w.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("initial vector has {} components, model has {} concepts",
                              j.size(), w.size()));
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string& name = w.concept_names()[i];
      if (!j[i].is_number()) {
        throw Error(ErrorCode::kInvalidConfig, fmt::format("initial[{}]: expected a number", i));
      }
      a[i] = j[i].get<double>();
      CheckInitialValue(name, a[i]);
      if (a[i] != 0.0 && w.protected_flags()[i]) {
        throw Error(ErrorCode::kProtectedActivation,
                    "concept '" + name + "' is protected and cannot be activated");
      }
    }
    return a;
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, "initial: expected an object or an array");
  }
  for (const auto& [name, value] : j.items()) {
    const auto index = w.Find(name);
    if (!index) throw Error(ErrorCode::kUnknownConcept, "unknown concept '" + name + "'");
    if (w.protected_flags()[*index]) {
      throw Error(ErrorCode::kProtectedActivation,
                  "concept '" + name + "' is protected and cannot be activated");
    }
    if (!value.is_number()) {
      throw Error(ErrorCode::kInvalidConfig, "initial." + name + ": expected a number");
    }
    a[*index] = value.get<double>();
    CheckInitialValue(name, a[*index]);
  }
  return a;
}

json SimulationToJson(const SimulationTrace& trace, const WeightMatrix& w,
                      const ReasoningConfig& config) {
  json protected_values = json::object();
  for (std::size_t i : w.ProtectedIndices()) {
    protected_values[w.concept_names()[i]] = trace.final_state()[i];
  }
  return {{"config", ReasoningConfigToJson(config)},
          {"conceptNames", w.concept_names()},
          {"trace", trace.states},
          {"terminal", TerminalToJson(trace.terminal)},
          {"protectedActivations", std::move(protected_values)}};
}

std::string TraceToCsv(const SimulationTrace& trace, const WeightMatrix& w) {
  std::string out = "iteration,concept,value\n";
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      out += csv::JoinRow({std::to_string(t), w.concept_names()[i],
                           FormatDouble(trace.states[t][i])}) +
             "\n";
    }
  }
  return out;
}

std::string CorrelationTableCsv(const WeightMatrix& w) {
  const std::vector<std::size_t> prot = w.ProtectedIndices();
  std::vector<std::string> header = {"id", "feature"};
  for (std::size_t p : prot) header.push_back(w.concept_names()[p]);
  std::string out = csv::JoinRow(header) + "\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::vector<std::string> row = {fmt::format("f{}", i + 1), w.concept_names()[i]};
    for (std::size_t p : prot) {
      if (p == i) {
        row.push_back("1.00*");
      } else {
        row.push_back(fmt::format("{:.2f}{}", w.at(i, p), w.significant(i, p) ? "*" : ""));
      }
    }
    out += csv::JoinRow(row) + "\n";
  }
  return out;
}

json ModelSummaryToJson(const std::string& model_id, const CorrelationModel& model) {
  return {{"modelId", model_id},
          {"conceptNames", model.weights.concept_names()},
          {"protected", model.weights.ProtectedNames()},
          {"warnings", model.warnings}};
}

EigenReport ComputeEigenReport(const WeightMatrix& w, double tol, int max_iterations,
                               std::uint64_t seed) {
  EigenReport report;
  report.eigen = DominantEigenvector(w, tol, max_iterations);
  std::mt19937_64 rng(seed);
  Activation start(w.size());
  for (double& x : start) x = 1.0 - UnitInterval(rng());
  ReasoningConfig config;
  config.phi = 1.0;
  config.max_iterations = max_iterations;
  config.epsilon = tol;
  const SimulationTrace trace = Run(start, w, config);
  report.cross_check_terminal = trace.terminal.kind;
  report.cross_check_distance = trace.terminal.kind == TerminalKind::kFixedPoint
                                    ? MaxAbsDifference(trace.final_state(), report.eigen.vector)
                                    : std::numeric_limits<double>::quiet_NaN();
  return report;
}

json EigenReportToJson(const EigenReport& report, const WeightMatrix& w) {
  return {{"conceptNames", w.concept_names()},
          {"lambda", report.eigen.lambda},
          {"vector", report.eigen.vector},
          {"converged", report.eigen.converged},
          {"iterations", report.eigen.iterations},
          {"crossCheck",
           {{"terminal", TerminalKindName(report.cross_check_terminal)},
            {"distance", report.cross_check_distance}}}};
}

std::string ContentHash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace fcm_bias
