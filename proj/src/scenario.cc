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

#include "fcm_bias/scenario.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"

namespace fcm_bias {
namespace {

using nlohmann::json;

[[noreturn]] void SpecError(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + what);
}

struct RunOutcome {
  std::optional<SimulationTrace> trace;
  std::string error;
};

template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), 8);
  if (workers == 1 || n < 4) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double UnitInterval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

ScenarioSpec ScenarioSpecFromJson(const json& j) {
  if (!j.is_object()) SpecError("scenario", "expected a JSON object");
  ScenarioSpec spec;
  if (j.contains("activated")) {
    if (!j["activated"].is_array()) SpecError("activated", "expected an array");
    for (const auto& a : j["activated"]) {
      if (!a.is_string()) SpecError("activated", "expected concept names");
      spec.activated.push_back(a.get<std::string>());
    }
  }
  if (j.contains("fixed")) {
    if (!j["fixed"].is_object()) SpecError("fixed", "expected an object");
    for (const auto& [name, value] : j["fixed"].items()) {
      if (!value.is_number()) SpecError("fixed." + name, "expected a number");
      spec.fixed[name] = value.get<double>();
    }
  }
  if (j.contains("random_concepts")) {
    if (!j["random_concepts"].is_number_unsigned()) {
      SpecError("random_concepts", "expected a non-negative integer");
    }
    spec.random_concepts = j["random_concepts"].get<std::size_t>();
  }
  if (j.contains("sampling")) {
    const std::string s = j["sampling"].is_string() ? j["sampling"].get<std::string>() : "";
    if (s == "uniform") {
      spec.sampling = Sampling::kUniform;
    } else if (s == "fixed") {
      spec.sampling = Sampling::kFixed;
    } else {
      SpecError("sampling", "expected \"uniform\" or \"fixed\"");
    }
  } else if (!spec.fixed.empty() && spec.activated.empty()) {
    spec.sampling = Sampling::kFixed;
  }
  if (j.contains("count")) {
    if (!j["count"].is_number_unsigned() || j["count"].get<std::size_t>() == 0) {
      SpecError("count", "expected a positive integer");
    }
    spec.count = j["count"].get<std::size_t>();
  } else if (spec.sampling == Sampling::kFixed) {
    spec.count = 1;
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) SpecError("seed", "expected a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  return spec;
}

json ScenarioSpecToJson(const ScenarioSpec& spec) {
  json j = {{"activated", spec.activated},
            {"sampling", spec.sampling == Sampling::kUniform ? "uniform" : "fixed"},
            {"count", spec.count},
            {"seed", spec.seed}};
  if (!spec.fixed.empty()) j["fixed"] = spec.fixed;
  if (spec.random_concepts > 0) j["random_concepts"] = spec.random_concepts;
  return j;
}

ScenarioSpec LoadScenarioSpec(const std::string& path) {
  json j;
  try {
    j = json::parse(csv::ReadFile(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": malformed JSON: " + e.what());
  }
  try {
    return ScenarioSpecFromJson(j);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void ValidateScenario(const ScenarioSpec& spec, const WeightMatrix& model) {
  auto check_concept = [&](const std::string& name) {
    const auto index = model.Find(name);
    if (!index) {
      throw Error(ErrorCode::kUnknownConcept, "unknown concept '" + name + "'");
    }
    if (model.protected_flags()[*index]) {
      throw Error(ErrorCode::kProtectedActivation,
                  "concept '" + name + "' is protected and cannot be activated");
    }
  };
  for (const auto& name : spec.activated) check_concept(name);
  for (const auto& [name, value] : spec.fixed) {
    check_concept(name);
    if (!(value > 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange,
                  fmt::format("fixed value for '{}' must lie in (0,1], got {}", name, value));
    }
  }
  if (spec.count == 0) SpecError("count", "must be positive");
  if (spec.sampling == Sampling::kFixed && spec.fixed.empty()) {
    SpecError("fixed", "fixed sampling needs at least one value");
  }
  if (spec.sampling == Sampling::kFixed && !spec.activated.empty()) {
    SpecError("activated", "fixed sampling takes values from 'fixed' only");
  }
  if (spec.random_concepts > 0) {
    if (!spec.activated.empty()) {
      SpecError("random_concepts", "cannot be combined with an explicit 'activated' list");
    }
    const std::size_t unprotected =
        model.size() - model.ProtectedIndices().size() - spec.fixed.size();
    if (spec.random_concepts > unprotected) {
      SpecError("random_concepts",
                fmt::format("asks for {} concepts but only {} unprotected ones are free",
                            spec.random_concepts, unprotected));
    }
  }
}

std::vector<Activation> MakeScenarios(const ScenarioSpec& spec, const WeightMatrix& model) {
  ValidateScenario(spec, model);
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> pool;
  if (spec.random_concepts > 0) {
    for (std::size_t i = 0; i < model.size(); ++i) {
      const bool pinned = spec.fixed.count(model.concept_names()[i]) > 0;
      if (!model.protected_flags()[i] && !pinned) pool.push_back(i);
    }
  }

  std::vector<Activation> out;
  out.reserve(spec.count);
  for (std::size_t k = 0; k < spec.count; ++k) {
    Activation a(model.size(), 0.0);
    for (const auto& [name, value] : spec.fixed) a[*model.Find(name)] = value;
    if (spec.sampling == Sampling::kUniform) {
      std::vector<std::size_t> chosen;
      if (spec.random_concepts > 0) {
        // Partial Fisher-Yates over a fresh copy of the pool.
        std::vector<std::size_t> candidates = pool;
        for (std::size_t c = 0; c < spec.random_concepts; ++c) {
          const std::size_t pick = c + rng() % (candidates.size() - c);
          std::swap(candidates[c], candidates[pick]);
          chosen.push_back(candidates[c]);
        }
        std::sort(chosen.begin(), chosen.end());
      } else {
        for (const auto& name : spec.activated) chosen.push_back(*model.Find(name));
      }
      for (std::size_t index : chosen) a[index] = 1.0 - UnitInterval(rng());
    }
    out.push_back(std::move(a));
  }
  return out;
}

PhiReport RunBatch(const std::vector<Activation>& scenarios, const WeightMatrix& w,
                   const ReasoningConfig& config,
                   const std::vector<std::size_t>& protected_concepts) {
  config.Validate();
  std::vector<RunOutcome> outcomes(scenarios.size());
  ParallelFor(scenarios.size(), [&](std::size_t k) {
    try {
      outcomes[k].trace = Run(scenarios[k], w, config);
    } catch (const Error& e) {
      outcomes[k].error = e.what();
    }
  });

  PhiReport report;
  report.phi = config.phi;
  std::vector<const Activation*> converged;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const RunOutcome& o = outcomes[k];
    if (!o.trace) {
      ++report.convergence.failed;
      report.errors.push_back(fmt::format("scenario {}: {}", k, o.error));
      continue;
    }
    switch (o.trace->terminal.kind) {
      case TerminalKind::kFixedPoint:
        ++report.convergence.fixed_point;
        converged.push_back(&o.trace->final_state());
        break;
      case TerminalKind::kLimitCycle: ++report.convergence.limit_cycle; break;
      case TerminalKind::kInconclusive: ++report.convergence.inconclusive; break;
    }
  }

  for (std::size_t index : protected_concepts) {
    ConceptStatistics stats;
    stats.name = w.concept_names().at(index);
    for (const RunOutcome& o : outcomes) {
      stats.per_run.push_back(o.trace ? o.trace->final_state()[index]
                                      : std::numeric_limits<double>::quiet_NaN());
    }
    if (!converged.empty()) {
      double sum = 0.0;
      stats.min = std::numeric_limits<double>::infinity();
      stats.max = -std::numeric_limits<double>::infinity();
      for (const Activation* a : converged) {
        const double v = (*a)[index];
        sum += v;
        stats.min = std::min(stats.min, v);
        stats.max = std::max(stats.max, v);
      }
      const double n = static_cast<double>(converged.size());
      stats.mean = sum / n;
      double sq = 0.0;
      for (const Activation* a : converged) {
        const double d = (*a)[index] - stats.mean;
        sq += d * d;
      }
      stats.stddev = std::sqrt(sq / n);
      // Summation order can leave the mean an ulp outside [min, max].
      stats.mean = std::clamp(stats.mean, stats.min, stats.max);
    }
    report.concepts.push_back(std::move(stats));
  }

  for (std::size_t a = 0; a < converged.size(); ++a) {
    for (std::size_t b = a + 1; b < converged.size(); ++b) {
      report.dispersion =
          std::max(report.dispersion, MaxAbsDifference(*converged[a], *converged[b]));
    }
  }
  return report;
}

BiasReport PhiSweep(const ScenarioSpec& spec, const WeightMatrix& w,
                    const ReasoningConfig& base_config, const std::vector<double>& phi_grid) {
  if (phi_grid.empty()) throw Error(ErrorCode::kInvalidConfig, "phi grid is empty");
  for (double phi : phi_grid) {
    if (!(phi >= 0.0 && phi <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, fmt::format("phi {} outside [0,1]", phi));
    }
  }
  const std::vector<Activation> scenarios = MakeScenarios(spec, w);
  BiasReport report;
  report.protected_concepts = w.ProtectedNames();
  const std::vector<std::size_t> protected_indices = w.ProtectedIndices();
  for (double phi : phi_grid) {
    ReasoningConfig config = base_config;
    config.phi = phi;
    report.per_phi.push_back(RunBatch(scenarios, w, config, protected_indices));
  }
  return report;
}

GroupRanking GroupReport(const WeightMatrix& expanded_model, const ScenarioSpec& spec,
                         const ReasoningConfig& config) {
  GroupRanking out;
  out.report = PhiSweep(spec, expanded_model, config, {config.phi});
  std::vector<const ConceptStatistics*> order;
  for (const auto& c : out.report.per_phi.front().concepts) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const ConceptStatistics* a, const ConceptStatistics* b) {
                     return a->mean > b->mean;
                   });
  for (const auto* c : order) out.ranking.push_back(c->name);
  return out;
}

json BiasReportToJson(const BiasReport& report) {
  json reports = json::array();
  for (const PhiReport& r : report.per_phi) {
    json concepts = json::array();
    for (const ConceptStatistics& c : r.concepts) {
      concepts.push_back({{"name", c.name},
                          {"mean", c.mean},
                          {"min", c.min},
                          {"max", c.max},
                          {"stddev", c.stddev},
                          {"perRun", c.per_run}});
    }
    reports.push_back({{"phi", r.phi},
                       {"concepts", std::move(concepts)},
                       {"convergence",
                        {{"fixedPoint", r.convergence.fixed_point},
                         {"limitCycle", r.convergence.limit_cycle},
                         {"inconclusive", r.convergence.inconclusive},
                         {"failed", r.convergence.failed}}},
                       {"dispersion", r.dispersion},
                       {"errors", r.errors}});
  }
  return {{"protectedConcepts", report.protected_concepts}, {"reports", std::move(reports)}};
}

std::string BiasReportToCsv(const BiasReport& report) {
  std::string out = "phi,concept,mean,min,max,stddev,dispersion,converged_count\n";
  for (const PhiReport& r : report.per_phi) {
    for (const ConceptStatistics& c : r.concepts) {
      out += csv::JoinRow({FormatDouble(r.phi), c.name, FormatDouble(c.mean),
                           FormatDouble(c.min), FormatDouble(c.max), FormatDouble(c.stddev),
                           FormatDouble(r.dispersion),
                           std::to_string(r.convergence.fixed_point)}) +
             "\n";
    }
  }
  return out;
}

}  // namespace fcm_bias
