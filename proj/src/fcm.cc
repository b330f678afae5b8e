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

#include "fcm_bias/fcm.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "fcm_bias/error.h"

namespace fcm_bias {
namespace {

void CheckDimension(std::size_t got, std::size_t want, std::string_view what) {
  if (got != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{} has {} components, weight matrix is {}x{}", what, got,
                            want, want));
  }
}

// W b for a column vector b.
Activation MultiplyColumn(const WeightMatrix& w, std::span<const double> b) {
  const std::size_t m = w.size();
  Activation out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += w.at(i, j) * b[j];
    out[i] = sum;
  }
  return out;
}

struct PowerPass {
  Activation vector;
  bool converged = false;
  bool zero_flow = false;
  int iterations = 0;
};

PowerPass PowerIterate(const WeightMatrix& w, Activation start, double tol,
                       int max_iterations) {
  PowerPass pass;
  pass.vector = RescaledTransfer(start);
  for (int it = 1; it <= max_iterations; ++it) {
    Activation next = RescaledTransfer(MultiplyColumn(w, pass.vector));
    pass.iterations = it;
    if (std::all_of(next.begin(), next.end(), [](double x) { return x == 0.0; })) {
      pass.zero_flow = true;
      return pass;
    }
    const double change = MaxAbsDifference(next, pass.vector);
    pass.vector = std::move(next);
    if (change < tol) {
      pass.converged = true;
      return pass;
    }
  }
  return pass;
}

}  // namespace

std::string_view TransferKindName(TransferKind kind) {
  switch (kind) {
    case TransferKind::kRescaled: return "rescaled";
    case TransferKind::kSigmoid: return "sigmoid";
    case TransferKind::kTanh: return "tanh";
  }
  return "rescaled";
}

TransferKind ParseTransferKind(std::string_view name) {
  if (name == "rescaled") return TransferKind::kRescaled;
  if (name == "sigmoid") return TransferKind::kSigmoid;
  if (name == "tanh") return TransferKind::kTanh;
  throw Error(ErrorCode::kInvalidConfig,
              fmt::format("unknown transfer '{}' (expected rescaled|sigmoid|tanh)", name));
}

int ReasoningConfig::EffectiveCyclePeriodMax() const {
  return cycle_period_max > 0 ? cycle_period_max : max_iterations / 2;
}

void ReasoningConfig::Validate() const {
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("phi must lie in [0,1], got {}", phi));
  }
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_iterations must be positive");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidConfig, "epsilon must be positive");
  if (cycle_period_max < 0) {
    throw Error(ErrorCode::kInvalidConfig, "cycle_period_max must be non-negative");
  }
  if (transfer.kind == TransferKind::kSigmoid && !(transfer.lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "sigmoid lambda must be positive");
  }
}

Activation RescaledTransfer(std::span<const double> raw) {
  double scale = 0.0;
  for (double x : raw) scale = std::max(scale, std::abs(x));
  Activation out(raw.size(), 0.0);
  if (scale == 0.0) return out;
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = raw[i] / scale;
    sum += out[i] * out[i];
  }
  const double norm = std::sqrt(sum);
  for (double& x : out) x /= norm;
  return out;
}

Activation SigmoidTransfer(std::span<const double> raw, double lambda) {
  Activation out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-lambda * raw[i]));
  }
  return out;
}

Activation TanhTransfer(std::span<const double> raw) {
  Activation out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::tanh(raw[i]);
  return out;
}

Activation ApplyTransfer(std::span<const double> raw, const Transfer& transfer) {
  switch (transfer.kind) {
    case TransferKind::kRescaled: return RescaledTransfer(raw);
    case TransferKind::kSigmoid: return SigmoidTransfer(raw, transfer.lambda);
    case TransferKind::kTanh: return TanhTransfer(raw);
  }
  return RescaledTransfer(raw);
}

Activation RawFlow(std::span<const double> state, const WeightMatrix& w) {
  const std::size_t m = w.size();
  CheckDimension(state.size(), m, "activation vector");
  Activation raw(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = state[i];
    if (a == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) raw[j] += a * w.at(i, j);
  }
  return raw;
}

Activation Step(std::span<const double> current, std::span<const double> initial,
                const WeightMatrix& w, const ReasoningConfig& config) {
  CheckDimension(initial.size(), w.size(), "initial vector");
  const Activation transferred = ApplyTransfer(RawFlow(current, w), config.transfer);
  const double phi = config.phi;
  Activation next(w.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = phi * transferred[i] + (1.0 - phi) * initial[i];
  }
  return next;
}

std::string_view TerminalKindName(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::kFixedPoint: return "fixed_point";
    case TerminalKind::kLimitCycle: return "limit_cycle";
    case TerminalKind::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SimulationTrace Run(std::span<const double> a0, const WeightMatrix& w,
                    const ReasoningConfig& config) {
  config.Validate();
  CheckDimension(a0.size(), w.size(), "initial vector");
  SimulationTrace trace;
  trace.states.emplace_back(a0.begin(), a0.end());
  for (int t = 0; t < config.max_iterations; ++t) {
    trace.states.push_back(Step(trace.states.back(), a0, w, config));
    const std::size_t last = trace.states.size() - 1;
    // A fixed point is only claimed from iteration 1 onwards.
    if (last >= 2 &&
        MaxAbsDifference(trace.states[last], trace.states[last - 1]) < config.epsilon) {
      trace.terminal.kind = TerminalKind::kFixedPoint;
      trace.terminal.fixed_point.at_iteration = static_cast<int>(last - 1);
      return trace;
    }
  }

  const int steps = static_cast<int>(trace.states.size()) - 1;
  auto matches = [&](int t, int period) {
    return MaxAbsDifference(trace.states[t + period], trace.states[t]) < config.epsilon;
  };
  const int period_max = std::min(config.EffectiveCyclePeriodMax(), (steps + 1) / 2);
  for (int period = 2; period <= period_max; ++period) {
    // One full period of matches at the end of the trace.
    bool repeating = true;
    for (int t = steps - 2 * period + 1; t <= steps - period && repeating; ++t) {
      repeating = matches(t, period);
    }
    if (!repeating) continue;
    int from = steps - 2 * period + 1;
    while (from > 0 && matches(from - 1, period)) --from;
    trace.terminal.kind = TerminalKind::kLimitCycle;
    trace.terminal.limit_cycle = {period, from};
    return trace;
  }
  trace.terminal.kind = TerminalKind::kInconclusive;
  return trace;
}

Activation RecoverInitial(std::span<const double> fixed_point, const WeightMatrix& w,
                          const ReasoningConfig& config) {
  config.Validate();
  if (config.phi == 1.0) {
    throw Error(ErrorCode::kPhiIsOne,
                "initial stimulus is not recoverable when phi = 1 (division by 1 - phi)");
  }
  CheckDimension(fixed_point.size(), w.size(), "fixed point");
  const Activation transferred = ApplyTransfer(RawFlow(fixed_point, w), config.transfer);
  Activation a0(w.size());
  for (std::size_t i = 0; i < a0.size(); ++i) {
    a0[i] = (fixed_point[i] - config.phi * transferred[i]) / (1.0 - config.phi);
  }
  return a0;
}

EigenResult DominantEigenvector(const WeightMatrix& w, double tol, int max_iterations) {
  const std::size_t m = w.size();
  EigenResult result;
  if (m == 0) return result;

  PowerPass first = PowerIterate(w, Activation(m, 1.0), tol, max_iterations);
  if (first.zero_flow) {
    // All-ones lies in the null space; retry from a seeded random start.
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Activation start(m);
    for (double& x : start) x = u(rng);
    first = PowerIterate(w, std::move(start), tol, max_iterations);
  }
  result.iterations = first.iterations;
  result.vector = std::move(first.vector);

  bool confirmed = false;
  if (first.converged) {
    Activation start(m);
    for (std::size_t i = 0; i < m; ++i) {
      start[i] = 1.0 + static_cast<double>(i + 1) / static_cast<double>(m + 1);
    }
    PowerPass second = PowerIterate(w, std::move(start), tol, max_iterations);
    const double agree = std::max(1e-6, 1e3 * tol);
    auto flip = [](Activation& v) {
      double sum = 0.0;
      for (double x : v) sum += x;
      if (sum < 0.0) {
        for (double& x : v) x = -x;
      }
    };
    flip(result.vector);
    flip(second.vector);
    confirmed = second.converged && !second.zero_flow &&
                MaxAbsDifference(second.vector, result.vector) < agree;
  }
  result.converged = first.converged && !first.zero_flow && confirmed;

  double sum = 0.0;
  for (double x : result.vector) sum += x;
  if (sum < 0.0) {
    for (double& x : result.vector) x = -x;
  }
  const Activation wv = MultiplyColumn(w, result.vector);
  result.lambda = 0.0;
  for (std::size_t i = 0; i < m; ++i) result.lambda += result.vector[i] * wv[i];
  return result;
}

double MaxAbsDifference(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace fcm_bias
