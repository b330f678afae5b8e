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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fcm_bias/error.h"
#include "fcm_bias/fcm.h"
#include "oracles.h"

namespace fcm_bias {
namespace {

WeightMatrix Matrix(std::vector<std::vector<double>> rows) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) names.push_back("c" + std::to_string(i));
  return WeightMatrix(names, oracle::Flatten(rows));
}

ReasoningConfig Config(double phi, int iters = 20) {
  ReasoningConfig c;
  c.phi = phi;
  c.max_iterations = iters;
  return c;
}

TEST(TransferTest, Rescaled) {
  EXPECT_EQ(RescaledTransfer(std::vector<double>{0, 0}), (Activation{0, 0}));
  const Activation r = RescaledTransfer(std::vector<double>{3, 4});
  EXPECT_DOUBLE_EQ(r[0], 0.6);
  EXPECT_DOUBLE_EQ(r[1], 0.8);
}

TEST(TransferTest, RescaledSurvivesTinyInputs) {
  for (double eps : {1e-1, 1e-100, 1e-300, 4.9e-324}) {
    const Activation r = RescaledTransfer(std::vector<double>(4, eps));
    for (double x : r) EXPECT_NEAR(x, 0.5, 1e-15) << eps;
  }
}

TEST(TransferTest, SigmoidAndTanh) {
  EXPECT_EQ(SigmoidTransfer(std::vector<double>{0}, 1.0)[0], 0.5);
  EXPECT_EQ(TanhTransfer(std::vector<double>{0})[0], 0.0);
  EXPECT_NEAR(SigmoidTransfer(std::vector<double>{1}, 2.0)[0], 1.0 / (1.0 + std::exp(-2.0)),
              1e-16);
}

TEST(TransferTest, Parsing) {
  EXPECT_EQ(ParseTransferKind("tanh"), TransferKind::kTanh);
  EXPECT_EQ(TransferKindName(TransferKind::kSigmoid), "sigmoid");
  EXPECT_THROW(ParseTransferKind("relu"), Error);
}

TEST(StepTest, HandEvaluation) {
  const WeightMatrix w = Matrix({{0, 0.8}, {0.5, 0}});
  const Activation a = {1, 0};
  EXPECT_EQ(RawFlow(a, w), (Activation{0, 0.8}));
  const Activation next = Step(a, a, w, Config(0.5));
  EXPECT_DOUBLE_EQ(next[0], 0.5);
  EXPECT_DOUBLE_EQ(next[1], 0.5);
}

TEST(StepTest, PhiZeroReturnsInitial) {
  const WeightMatrix w = Matrix({{0, 0.3, 0.2}, {0.3, 0, 0.9}, {0.2, 0.9, 0}});
  const Activation initial = {0.1, 0.7, 0.4};
  const Activation current = {0.9, 0.2, 0.3};
  EXPECT_EQ(Step(current, initial, w, Config(0.0)), initial);
}

TEST(StepTest, DimensionMismatch) {
  const WeightMatrix w = Matrix({{0, 1}, {1, 0}});
  const Activation a = {1, 0, 0};
  try {
    Step(a, a, w, Config(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(RunTest, PhiZeroFixedPointAtOne) {
  const WeightMatrix w = Matrix({{0, 0.4}, {0.4, 0}});
  const Activation a0 = {0.3, 0.6};
  const SimulationTrace t = fcm_bias::Run(a0, w, Config(0.0));
  EXPECT_EQ(t.terminal.kind, TerminalKind::kFixedPoint);
  EXPECT_EQ(t.terminal.fixed_point.at_iteration, 1);
  EXPECT_EQ(t.final_state(), a0);
}

TEST(RunTest, LimitCycle) {
  const WeightMatrix w = Matrix({{0, 1}, {1, 0}});
  const SimulationTrace t = fcm_bias::Run(Activation{1, 0}, w, Config(1.0));
  ASSERT_EQ(t.terminal.kind, TerminalKind::kLimitCycle);
  EXPECT_EQ(t.terminal.limit_cycle.period, 2);
  EXPECT_EQ(t.terminal.limit_cycle.from_iteration, 0);
  EXPECT_EQ(t.states[1], (Activation{0, 1}));
  EXPECT_EQ(t.states[2], (Activation{1, 0}));
  EXPECT_EQ(t.states.size(), 21u);
}

TEST(RunTest, ZeroFlowFixedPoint) {
  // Concept 0 only feeds concept 1 through a zero weight.
  const WeightMatrix w = Matrix({{0, 0, 0}, {0, 0, 0.5}, {0, 0.5, 0}});
  const Activation a0 = {0.5, 0, 0};
  for (double phi : {0.3, 0.7}) {
    const SimulationTrace t = fcm_bias::Run(a0, w, Config(phi));
    ASSERT_EQ(t.terminal.kind, TerminalKind::kFixedPoint);
    EXPECT_EQ(t.terminal.fixed_point.at_iteration, 1);
    EXPECT_EQ(t.states[1][0], (1.0 - phi) * 0.5);
    EXPECT_EQ(t.states[2], t.states[1]);
  }
}

TEST(RunTest, AllZeroInitialStaysZero) {
  const WeightMatrix w = Matrix({{0, 0.4}, {0.4, 0}});
  const SimulationTrace t = fcm_bias::Run(Activation{0, 0}, w, Config(0.5));
  EXPECT_EQ(t.final_state(), (Activation{0, 0}));
  EXPECT_EQ(t.terminal.kind, TerminalKind::kFixedPoint);
}

TEST(RunTest, InconclusiveWhenIterationCapTooSmall) {
  const WeightMatrix w = Matrix({{0, 0.9, 0.1}, {0.9, 0, 0.8}, {0.1, 0.8, 0}});
  const SimulationTrace t = fcm_bias::Run(Activation{1, 0, 0}, w, Config(1.0, 2));
  EXPECT_EQ(t.terminal.kind, TerminalKind::kInconclusive);
}

TEST(RunTest, StatesStayBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + trial % 10;
    const WeightMatrix w = Matrix(oracle::RandomSymmetric(m, rng));
    Activation a0(m);
    for (double& x : a0) x = u(rng);
    const SimulationTrace t = fcm_bias::Run(a0, w, Config(u(rng), 50));
    for (const Activation& s : t.states) {
      for (double x : s) {
        ASSERT_GE(x, -1e-12);
        ASSERT_LE(x, 1.0 + 1e-12);
      }
    }
  }
}

TEST(RunTest, ConfigValidation) {
  const WeightMatrix w = Matrix({{0, 1}, {1, 0}});
  ReasoningConfig bad = Config(1.5);
  EXPECT_THROW(fcm_bias::Run(Activation{1, 0}, w, bad), Error);
  bad = Config(0.5, 0);
  EXPECT_THROW(fcm_bias::Run(Activation{1, 0}, w, bad), Error);
}

TEST(RecoverInitialTest, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const WeightMatrix w = Matrix(oracle::RandomSymmetric(5, rng));
    Activation a0(5);
    for (double& x : a0) x = u(rng);
    const SimulationTrace t = fcm_bias::Run(a0, w, Config(0.5, 500));
    if (t.terminal.kind != TerminalKind::kFixedPoint) continue;
    const Activation back = RecoverInitial(t.final_state(), w, Config(0.5));
    EXPECT_LT(MaxAbsDifference(back, a0), 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(RecoverInitialTest, PhiZeroIsIdentityAndPhiOneThrows) {
  const WeightMatrix w = Matrix({{0, 0.4}, {0.4, 0}});
  const Activation v = {0.2, 0.9};
  EXPECT_EQ(RecoverInitial(v, w, Config(0.0)), v);
  try {
    RecoverInitial(v, w, Config(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPhiIsOne);
  }
}

TEST(EigenTest, RankOne) {
  const EigenResult r = DominantEigenvector(Matrix({{0.5, 0.5}, {0.5, 0.5}}), 1e-12, 1000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.lambda, 1.0, 1e-12);
  EXPECT_NEAR(r.vector[0], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.vector[1], 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(EigenTest, TiedMagnitudesDoNotConverge) {
  const EigenResult r = DominantEigenvector(Matrix({{0, 1}, {1, 0}}), 1e-12, 1000);
  EXPECT_FALSE(r.converged);
}

TEST(EigenTest, ZeroMatrix) {
  const EigenResult r = DominantEigenvector(Matrix({{0, 0}, {0, 0}}), 1e-12, 100);
  EXPECT_FALSE(r.converged);
}

TEST(EigenTest, MatchesJacobi) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rows = oracle::RandomSymmetric(3 + trial % 8, rng);
    const oracle::Eigen e = oracle::Jacobi(rows);
    const EigenResult r = DominantEigenvector(Matrix(rows), 1e-13, 100000);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.lambda, e.values[0], 1e-9);
    double sign = 0.0;
    for (double x : e.vectors[0]) sign += x;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_NEAR(r.vector[i], (sign < 0 ? -1 : 1) * e.vectors[0][i], 1e-8);
    }
  }
}

}  // namespace
}  // namespace fcm_bias
