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

// Fuzzy cognitive map reasoning with the quasi-nonlinear update
//
//   A(t+1) = phi * f(A(t) W) + (1 - phi) * A(0)
//
// where the raw flow is a row vector times W, i.e. raw_j = sum_i a_i w[i][j].
// With the rescaled transfer f(X) = X / ||X||_2 (and f(0) = 0) and W in
// [0,1]^{MxM}, every iterate stays in [0,1]^M. When phi < 1 distinct initial
// stimuli reach distinct fixed points, and RecoverInitial() inverts the map.
// When phi = 1 and W is symmetric the update is power iteration, so the
// terminal state is the dominant eigenvector of W.

#ifndef FCM_BIAS_FCM_H_
#define FCM_BIAS_FCM_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fcm_bias/weight_matrix.h"

namespace fcm_bias {

using Activation = std::vector<double>;

enum class TransferKind { kRescaled, kSigmoid, kTanh };

std::string_view TransferKindName(TransferKind kind);
// Accepts "rescaled", "sigmoid", "tanh"; throws kInvalidConfig otherwise.
TransferKind ParseTransferKind(std::string_view name);

struct Transfer {
  TransferKind kind = TransferKind::kRescaled;
  double lambda = 1.0;  // sigmoid slope
};

struct ReasoningConfig {
  double phi = 1.0;
  int max_iterations = 20;
  Transfer transfer;
  double epsilon = 1e-8;
  // Largest limit-cycle period searched; 0 means max_iterations / 2.
  int cycle_period_max = 0;

  int EffectiveCyclePeriodMax() const;
  // Throws kInvalidConfig on phi outside [0,1], lambda <= 0, T < 1,
  // epsilon <= 0 or negative cycle_period_max.
  void Validate() const;
};

// x / ||x||_2, or the zero vector for a zero input. The norm is computed on
// x / max|x_i| so inputs down to the smallest subnormal neither underflow
// nor overflow.
Activation RescaledTransfer(std::span<const double> raw);
Activation SigmoidTransfer(std::span<const double> raw, double lambda);
Activation TanhTransfer(std::span<const double> raw);
Activation ApplyTransfer(std::span<const double> raw, const Transfer& transfer);

// raw_j = sum_i state_i * w[i][j]. Throws kDimensionMismatch.
Activation RawFlow(std::span<const double> state, const WeightMatrix& w);

// One application of the quasi-nonlinear rule. A zero raw flow under the
// rescaled transfer yields (1 - phi) * initial.
Activation Step(std::span<const double> current, std::span<const double> initial,
                const WeightMatrix& w, const ReasoningConfig& config);

struct FixedPoint {
  // Smallest t >= 1 with ||A(t+1) - A(t)||_inf < epsilon.
  int at_iteration = 0;
};

struct LimitCycle {
  int period = 0;
  // Earliest t from which A(t+P) matches A(t) through the end of the trace.
  int from_iteration = 0;
};

enum class TerminalKind { kFixedPoint, kLimitCycle, kInconclusive };

std::string_view TerminalKindName(TerminalKind kind);

struct TerminalState {
  TerminalKind kind = TerminalKind::kInconclusive;
  FixedPoint fixed_point;
  LimitCycle limit_cycle;
};

struct SimulationTrace {
  std::vector<Activation> states;  // states[0] is A(0)
  TerminalState terminal;

  const Activation& final_state() const { return states.back(); }
};

// Iterates until a fixed point (stopping right after detection) or until
// max_iterations steps, then looks for the smallest period
// P in [2, EffectiveCyclePeriodMax()] repeating through the tail.
SimulationTrace Run(std::span<const double> a0, const WeightMatrix& w,
                    const ReasoningConfig& config);

// (V - phi f(V W)) / (1 - phi): the unique initial stimulus whose run settles
// at the fixed point V. Throws kPhiIsOne when phi == 1.
Activation RecoverInitial(std::span<const double> fixed_point, const WeightMatrix& w,
                          const ReasoningConfig& config);

struct EigenResult {
  double lambda = 0.0;
  Activation vector;  // unit Euclidean norm, sign chosen so the sum is >= 0
  bool converged = false;
  int iterations = 0;
};

// Power iteration b <- W b / ||W b|| from the all-ones vector. A second pass
// from a fixed non-uniform positive start must converge to the same vector
// before `converged` is reported; this exposes tied dominant magnitudes
// (e.g. eigenvalues +1 and -1) that an eigenvector start would hide. lambda
// is the Rayleigh quotient v^T W v.
EigenResult DominantEigenvector(const WeightMatrix& w, double tol, int max_iterations);

double MaxAbsDifference(std::span<const double> a, std::span<const double> b);

}  // namespace fcm_bias

#endif  // FCM_BIAS_FCM_H_
