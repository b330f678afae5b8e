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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.h"
#include "fcm_bias/correlation.h"
#include "fcm_bias/csv.h"
#include "fcm_bias/fcm.h"
#include "fcm_bias/io.h"
#include "fcm_bias/scenario.h"
#include "oracles.h"
#include "test_util.h"

namespace fcm_bias {
namespace {

using testing::DataPath;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

WeightMatrix FromRows(const oracle::Matrix& rows) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) names.push_back(fmt::format("c{}", i));
  return WeightMatrix(names, oracle::Flatten(rows));
}

ReasoningConfig Config(double phi, int iters, TransferKind kind = TransferKind::kRescaled) {
  ReasoningConfig c;
  c.phi = phi;
  c.max_iterations = iters;
  c.transfer.kind = kind;
  return c;
}

const CorrelationModel& GermanModel() {
  static const CorrelationModel model =
      BuildModel(csv::ReadFile(DataPath("german_credit.csv")),
                 LoadSchema(DataPath("german_credit.schema.json")));
  return model;
}

double Mean(const PhiReport& r, const std::string& name) {
  for (const auto& c : r.concepts) {
    if (c.name == name) return c.mean;
  }
  return std::nan("");
}

// Every iterate of 1,000 random runs stays inside [0, 1].
Outcome Boundedness() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 25);
  double lo = 0.0, hi = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = size(rng);
    const WeightMatrix w = FromRows(oracle::RandomSymmetric(m, rng));
    Activation a0(m);
    for (double& x : a0) x = u(rng);
    const SimulationTrace t = Run(a0, w, Config(u(rng), 50));
    for (const Activation& s : t.states) {
      for (double x : s) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  const double secs = Seconds(start);
  o.Require(lo >= -1e-12 && hi <= 1.0 + 1e-12, "iterate outside [0,1]");
  o.Require(secs < 5.0, "runtime over 5 s");
  o.detail += fmt::format(" min={:.3g} max={:.17g} time={:.2f}s", lo, hi, secs);
  return o;
}

// phi = 1 runs land on the Jacobi dominant eigenvector.
Outcome PowerIteration() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(3, 25);
  int matrices = 0, runs = 0;
  double worst = 0.0;
  while (matrices < 100) {
    const auto rows = oracle::RandomSymmetric(size(rng), rng);
    const oracle::Eigen e = oracle::Jacobi(rows);
    const double ratio =
        std::max(std::abs(e.values[1]), std::abs(e.values.back())) / std::abs(e.values[0]);
    if (!(e.values[0] > 0.0 && ratio <= 0.9)) continue;  // strictly dominant, verified
    ++matrices;
    std::vector<double> v = e.vectors[0];
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum < 0) {
      for (double& x : v) x = -x;
    }
    const WeightMatrix w = FromRows(rows);
    for (int k = 0; k < 10; ++k) {
      Activation a0(rows.size());
      for (double& x : a0) x = 1.0 - UnitInterval(rng());
      const SimulationTrace t = Run(a0, w, Config(1.0, 2000));
      ++runs;
      o.Require(t.terminal.kind == TerminalKind::kFixedPoint, "run did not reach a fixed point");
      worst = std::max(worst, MaxAbsDifference(t.final_state(), v));
    }
  }
  const double secs = Seconds(start);
  o.Require(worst < 1e-6, "terminal state differs from eigenvector");
  o.Require(secs < 10.0, "runtime over 10 s");
  o.detail += fmt::format(" matrices={} runs={} max_dist={:.3g} time={:.2f}s", matrices, runs,
                          worst, secs);
  return o;
}

// Fixed points invert back to their stimulus; distinct stimuli stay distinct.
Outcome Injectivity() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(3, 12);
  int fixed = 0, pairs = 0;
  double worst_recovery = 0.0, closest_pair = 1e300;
  for (int model = 0; model < 100; ++model) {
    const std::size_t m = size(rng);
    const WeightMatrix w = FromRows(oracle::RandomSymmetric(m, rng));
    for (double phi : {0.2, 0.5, 0.8}) {
      const ReasoningConfig config = Config(phi, 1000);
      Activation a(m), b(m);
      do {
        for (std::size_t i = 0; i < m; ++i) {
          a[i] = u(rng);
          b[i] = u(rng);
        }
      } while (MaxAbsDifference(a, b) < 0.1);
      const SimulationTrace ta = Run(a, w, config);
      const SimulationTrace tb = Run(b, w, config);
      for (const auto* t : {&ta, &tb}) {
        if (t->terminal.kind != TerminalKind::kFixedPoint) continue;
        ++fixed;
        const Activation back = RecoverInitial(t->final_state(), w, config);
        worst_recovery = std::max(worst_recovery, MaxAbsDifference(back, t->states[0]));
      }
      if (ta.terminal.kind == TerminalKind::kFixedPoint &&
          tb.terminal.kind == TerminalKind::kFixedPoint) {
        ++pairs;
        closest_pair = std::min(closest_pair, MaxAbsDifference(ta.final_state(), tb.final_state()));
      }
    }
  }
  const double secs = Seconds(start);
  o.Require(fixed > 0 && pairs > 0, "no run reached a fixed point");
  o.Require(worst_recovery < 1e-6, "recovered stimulus off by more than 1e-6");
  o.Require(closest_pair > 1e-9, "distinct stimuli share a fixed point");
  o.Require(secs < 10.0, "runtime over 10 s");
  o.detail += fmt::format(" fixed_points={}/600 pairs={} max_recovery_err={:.3g} "
                          "min_pair_dist={:.3g} time={:.2f}s",
                          fixed, pairs, worst_recovery, closest_pair, secs);
  return o;
}

Outcome TransferContracts() {
  Outcome o;
  o.Require(RescaledTransfer(Activation{0, 0, 0}) == Activation{0, 0, 0}, "f(0) != 0");
  double worst_small = 0.0;
  for (int e = 1; e <= 300; ++e) {
    const double eps = std::pow(10.0, -e);
    for (std::size_t m : {2u, 5u, 20u}) {
      const Activation r = RescaledTransfer(Activation(m, eps));
      for (double x : r) worst_small = std::max(worst_small, std::abs(x - 1.0 / std::sqrt(m)));
    }
  }
  o.Require(worst_small < 1e-12, "rescaled transfer of (eps,...,eps) is not 1/sqrt(M)");
  o.Require(SigmoidTransfer(Activation{0}, 1.0)[0] == 0.5, "sigmoid(0) != 0.5");
  o.Require(TanhTransfer(Activation{0})[0] == 0.0, "tanh(0) != 0");
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_scale = 0.0;
  for (int k = 0; k < 100; ++k) {
    Activation x(2 + k % 20);
    for (double& v : x) v = u(rng);
    const double c = std::pow(10.0, 12.0 * u(rng) - 6.0);
    Activation cx = x;
    for (double& v : cx) v *= c;
    worst_scale = std::max(worst_scale, MaxAbsDifference(RescaledTransfer(cx), RescaledTransfer(x)));
  }
  o.Require(worst_scale < 1e-12, "scale collapse violated");
  o.detail += fmt::format(" small_eps_err={:.3g} scale_err={:.3g}", worst_small, worst_scale);
  return o;
}

Outcome ZeroFlow() {
  Outcome o;
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t m = 3 + k % 6;
    auto rows = oracle::RandomSymmetric(m, rng);
    // Concept 0 is isolated, so a stimulus on it has zero outgoing flow.
    for (std::size_t j = 0; j < m; ++j) rows[0][j] = rows[j][0] = 0.0;
    const WeightMatrix w = FromRows(rows);
    Activation a0(m, 0.0);
    a0[0] = (k % 4 + 1) / 4.0;
    for (double phi : {0.3, 0.7}) {
      const SimulationTrace t = Run(a0, w, Config(phi, 20));
      ++cases;
      o.Require(t.terminal.kind == TerminalKind::kFixedPoint &&
                    t.terminal.fixed_point.at_iteration == 1,
                "fixed point not detected at iteration 1");
      Activation expected = a0;
      for (double& x : expected) x *= 1.0 - phi;
      worst = std::max(worst, MaxAbsDifference(t.states[1], expected));
      worst = std::max(worst, MaxAbsDifference(t.final_state(), expected));
    }
  }
  o.Require(worst <= 1e-15, "state differs from (1 - phi) A0");
  o.detail += fmt::format(" cases={} max_err={:.3g}", cases, worst);
  return o;
}

Outcome LimitCycleDetection() {
  Outcome o;
  const SimulationTrace t = Run(Activation{1, 0}, FromRows({{0, 1}, {1, 0}}), Config(1.0, 20));
  o.Require(t.terminal.kind == TerminalKind::kLimitCycle, "not classified as a limit cycle");
  o.Require(t.terminal.limit_cycle.period == 2, "period is not 2");
  o.detail += fmt::format(" terminal={} period={}", TerminalKindName(t.terminal.kind),
                          t.terminal.limit_cycle.period);
  return o;
}

Outcome Table2() {
  Outcome o;
  const auto start = Clock::now();
  const FeatureSchema schema = LoadSchema(DataPath("german_credit.schema.json"));
  const Dataset data = Normalize(LoadCsv(DataPath("german_credit.csv"), schema));
  const CorrelationModel model = BuildWeightMatrix(data);
  const double secs = Seconds(start);
  struct Cell {
    const char* a;
    const char* b;
    double expected;
  };
  const Cell cells[] = {{"age", "residence_since", 0.27},
                        {"gender", "housing", 0.23},
                        {"gender", "employment_since", 0.22},
                        {"age", "existing_credits", 0.15}};
  for (const Cell& c : cells) {
    const std::size_t i = *schema.Find(c.a), j = *schema.Find(c.b);
    const double got = model.weights.at(i, j);
    o.detail += fmt::format(" {}~{}={:.4f}", c.a, c.b, got);
    if (std::abs(got - c.expected) > 0.02) {
      o.Require(false, fmt::format("{}~{} = {:.4f}, expected {} +/- 0.02", c.a, c.b, got,
                                   c.expected));
      std::cout << "  contingency table " << c.a << " x " << c.b << ":\n"
                << Crosstab(data.columns[i].values, data.columns[j].values).ToString();
    }
  }
  o.Require(secs < 5.0, "runtime over 5 s");
  o.detail += fmt::format(" time={:.2f}s", secs);
  return o;
}

Outcome ScenarioReproduction() {
  Outcome o;
  const auto start = Clock::now();
  const WeightMatrix& w = GermanModel().weights;
  const ReasoningConfig config = Config(1.0, 20);
  const BiasReport s1 =
      PhiSweep(LoadScenarioSpec(DataPath("scenarios/scenario1.json")), w, config, {0.6, 1.0});
  const double g06 = Mean(s1.per_phi[0], "gender");
  const double g10 = Mean(s1.per_phi[1], "gender");
  const double disp = s1.per_phi[1].dispersion;
  o.Require(std::abs(g10 - 0.22) <= 0.04, "scenario 1 gender at phi=1 outside 0.22 +/- 0.04");
  o.Require(disp < 1e-6, "scenario 1 dispersion at phi=1 not below 1e-6");
  o.Require(std::abs(g06 - 0.11) <= 0.04, "scenario 1 gender at phi=0.6 outside 0.11 +/- 0.04");
  const BiasReport s3 = PhiSweep(LoadScenarioSpec(DataPath("scenarios/scenario3.json")), w,
                                 config, {0.6, 0.8, 1.0});
  for (const PhiReport& r : s3.per_phi) {
    const double g = Mean(r, "gender"), a = Mean(r, "age"), f = Mean(r, "foreign_worker");
    o.Require(g > a && g > f, fmt::format("scenario 3 phi={}: gender not largest", r.phi));
    o.detail += fmt::format(" s3[phi={}]: gender={:.4f} age={:.4f} fw={:.4f};", r.phi, g, a, f);
  }
  const double secs = Seconds(start);
  o.Require(secs < 5.0, "runtime over 5 s");
  o.detail += fmt::format(" s1: gender(1.0)={:.4f} gender(0.6)={:.4f} dispersion={:.3g} "
                          "converged(1.0)={}/20 time={:.2f}s",
                          g10, g06, disp, s1.per_phi[1].convergence.fixed_point, secs);
  return o;
}

Outcome GroupModel() {
  Outcome o;
  FeatureSchema schema = LoadSchema(DataPath("german_credit_groups.schema.json"));
  const std::string text = csv::ReadFile(DataPath("german_credit.csv"));
  const CorrelationModel model = BuildModel(text, schema);
  o.Require(model.weights.size() == 27, "expanded model does not have 27 concepts");
  const GroupRanking g =
      GroupReport(model.weights, LoadScenarioSpec(DataPath("scenarios/groups.json")),
                  Config(1.0, 20));
  std::string top_age;
  for (const auto& name : g.ranking) {
    if (name.rfind("age_", 0) == 0) {
      top_age = name;
      break;
    }
  }
  o.Require(top_age == "age_le_30", "top age group is " + top_age);

  // Distribution check: the class label rides along as an extra nominal column.
  FeatureSpec label;
  label.name = "class";
  label.kind = FeatureKind::kNominal;
  schema.features.push_back(label);
  const Dataset d = ExpandGroups(ParseCsv(text, schema));
  const Column& cls = d.columns[*d.schema.Find("class")];
  const char* groups[] = {"age_le_30", "age_from_30_le_41", "age_from_41_le_52", "age_gt_52"};
  std::vector<int> bad, good;
  for (const char* name : groups) {
    const Column& ind = d.columns[*d.schema.Find(name)];
    int nb = 0, ng = 0;
    for (std::size_t r = 0; r < d.row_count; ++r) {
      if (ind.values[r] != 1.0) continue;
      (cls.Decode(r) == "2" ? nb : ng) += 1;
    }
    bad.push_back(nb);
    good.push_back(ng);
  }
  o.Require(bad == std::vector<int>{137, 91, 42, 30}, "bad-credit counts differ");
  o.Require(good == std::vector<int>{234, 264, 127, 75}, "good-credit counts differ");
  o.detail += fmt::format(" top_age={} bad=({}) good=({})", top_age, fmt::join(bad, ","),
                          fmt::join(good, ","));
  return o;
}

Outcome Determinism() {
  Outcome o;
  testing::TempDir dir;
  const std::string weights = dir / "weights.json";
  {
    std::ofstream out(weights, std::ios::binary);
    out << DumpJson(WeightMatrixToJson(GermanModel().weights));
  }
  std::ostringstream sink;
  auto sweep = [&](const std::string& out_dir) {
    return RunCli({"sweep", "--weights", weights, "--scenario",
                   DataPath("scenarios/scenario3.json"), "--phis", "0.6,0.8,1.0", "--seed",
                   "20220101", "--out", out_dir},
                  sink, sink);
  };
  o.Require(sweep(dir / "run1") == 0 && sweep(dir / "run2") == 0, "sweep failed");
  for (const char* f : {"report.json", "report.csv", "dispersion.csv"}) {
    const std::string a = testing::ReadText(dir.path() / "run1" / f);
    const std::string b = testing::ReadText(dir.path() / "run2" / f);
    o.Require(!a.empty() && a == b, std::string(f) + " differs between runs");
    o.detail += fmt::format(" {}:{}B", f, a.size());
  }
  return o;
}

Outcome Figure1() {
  Outcome o;
  const WeightMatrix w = FromRows({{0, 0.8}, {0.5, 0}});
  double sigmoid_at_zero = 1.0, others_max = 0.0;
  for (int p = 0; p <= 10; ++p) {
    const double phi = p / 10.0;
    for (int a = 0; a <= 10; ++a) {
      const Activation a0 = {a / 10.0, 0.0};
      const double sig = Run(a0, w, Config(phi, 30, TransferKind::kSigmoid)).final_state()[0];
      if (a == 0 && p == 10) sigmoid_at_zero = sig;
      for (TransferKind k : {TransferKind::kRescaled, TransferKind::kTanh}) {
        const double v = Run(a0, w, Config(phi, 30, k)).final_state()[0];
        if (a == 0) others_max = std::max(others_max, std::abs(v));
      }
    }
  }
  o.Require(sigmoid_at_zero > 0.4, "sigmoid neuron 1 not above 0.4 at a1=0, phi=1");
  o.Require(others_max == 0.0, "rescaled or tanh neuron 1 active at a1=0");
  o.detail += fmt::format(" sigmoid(a1=0,phi=1)={:.4f} rescaled/tanh max at a1=0: {}",
                          sigmoid_at_zero, others_max);
  return o;
}

}  // namespace
}  // namespace fcm_bias

int main() {
  using fcm_bias::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"boundedness", fcm_bias::Boundedness},
      {"power_iteration_equivalence", fcm_bias::PowerIteration},
      {"fixed_point_injectivity", fcm_bias::Injectivity},
      {"transfer_contracts", fcm_bias::TransferContracts},
      {"zero_flow", fcm_bias::ZeroFlow},
      {"limit_cycle", fcm_bias::LimitCycleDetection},
      {"correlation_table", fcm_bias::Table2},
      {"scenario_reproduction", fcm_bias::ScenarioReproduction},
      {"group_model", fcm_bias::GroupModel},
      {"determinism", fcm_bias::Determinism},
      {"toy_transfer_contrast", fcm_bias::Figure1},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ":" << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", std::size(criteria) - failures,
                           std::size(criteria));
  return failures == 0 ? 0 : 1;
}
