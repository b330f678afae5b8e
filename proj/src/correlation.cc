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

#include "fcm_bias/correlation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "fcm_bias/error.h"

namespace fcm_bias {
namespace {

void CheckLengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                fmt::format("columns differ in length ({} vs {})", x.size(), y.size()));
  }
}

bool IsConstant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return lo == v.end() || *lo == *hi;
}

double Mean(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Distinct codes in ascending order -> dense index.
std::map<double, std::size_t> Levels(std::span<const double> codes) {
  std::map<double, std::size_t> levels;
  for (double c : codes) levels.emplace(c, 0);
  std::size_t next = 0;
  for (auto& [code, index] : levels) index = next++;
  return levels;
}

}  // namespace

PearsonResult Pearson(std::span<const double> x, std::span<const double> y) {
  CheckLengths(x, y);
  if (x.size() < 3) {
    throw Error(ErrorCode::kLengthMismatch, "pearson needs at least 3 observations");
  }
  if (IsConstant(x) || IsConstant(y)) {
    throw Error(ErrorCode::kConstantColumn, "pearson: constant column");
  }
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  PearsonResult result;
  result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(x.size() - 2);
  const double one_minus_r2 = 1.0 - result.r * result.r;
  if (one_minus_r2 <= 0.0) {
    result.p = 0.0;
  } else {
    const double t = std::abs(result.r) * std::sqrt(df / one_minus_r2);
    boost::math::students_t dist(df);
    result.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  }
  return result;
}

ContingencyTable Crosstab(std::span<const double> x, std::span<const double> y) {
  CheckLengths(x, y);
  const auto rows = Levels(x);
  const auto cols = Levels(y);
  ContingencyTable table;
  for (const auto& [code, index] : rows) table.row_codes.push_back(code);
  for (const auto& [code, index] : cols) table.col_codes.push_back(code);
  table.counts.assign(rows.size(), std::vector<double>(cols.size(), 0.0));
  for (std::size_t k = 0; k < x.size(); ++k) {
    table.counts[rows.at(x[k])][cols.at(y[k])] += 1.0;
  }
  return table;
}

std::string ContingencyTable::ToString() const {
  std::string out = "x\\y";
  for (double c : col_codes) out += fmt::format("\t{}", c);
  out += "\n";
  for (std::size_t r = 0; r < counts.size(); ++r) {
    out += fmt::format("{}", row_codes[r]);
    for (double n : counts[r]) out += fmt::format("\t{}", n);
    out += "\n";
  }
  return out;
}

CramersVResult CramersV(std::span<const double> x, std::span<const double> y) {
  const ContingencyTable table = Crosstab(x, y);
  const std::size_t r = table.row_codes.size();
  const std::size_t c = table.col_codes.size();
  if (r < 2 || c < 2) {
    throw Error(ErrorCode::kSingleCategory, "cramers_v: fewer than two observed categories");
  }
  std::vector<double> row_sum(r, 0.0), col_sum(c, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      row_sum[i] += table.counts[i][j];
      col_sum[j] += table.counts[i][j];
      n += table.counts[i][j];
    }
  }
  CramersVResult result;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double expected = row_sum[i] * col_sum[j] / n;
      const double diff = table.counts[i][j] - expected;
      result.chi_squared += diff * diff / expected;
    }
  }
  const double q = static_cast<double>(std::min(r, c) - 1);
  result.v = std::clamp(std::sqrt(result.chi_squared / (n * q)), 0.0, 1.0);
  boost::math::chi_squared dist(static_cast<double>((r - 1) * (c - 1)));
  result.p = std::clamp(boost::math::cdf(boost::math::complement(dist, result.chi_squared)),
                        0.0, 1.0);
  return result;
}

RSquaredResult RSquared(std::span<const double> groups, std::span<const double> y) {
  CheckLengths(groups, y);
  const auto levels = Levels(groups);
  if (levels.size() < 2) {
    throw Error(ErrorCode::kSingleCategory, "r_squared: fewer than two observed categories");
  }
  if (IsConstant(y)) {
    throw Error(ErrorCode::kConstantColumn, "r_squared: constant numeric column");
  }
  const std::size_t k = levels.size();
  std::vector<double> sum(k, 0.0), count(k, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t g = levels.at(groups[i]);
    sum[g] += y[i];
    count[g] += 1.0;
  }
  const double mean = Mean(y);
  double ss_between = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double d = sum[g] / count[g] - mean;
    ss_between += count[g] * d * d;
  }
  double ss_total = 0.0, ss_within = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t g = levels.at(groups[i]);
    const double d = y[i] - mean;
    const double dw = y[i] - sum[g] / count[g];
    ss_total += d * d;
    ss_within += dw * dw;
  }

  RSquaredResult result;
  result.r2 = std::clamp(ss_between / ss_total, 0.0, 1.0);
  const double df1 = static_cast<double>(k - 1);
  const double df2 = static_cast<double>(y.size()) - static_cast<double>(k);
  if (df2 <= 0.0) {
    result.f_statistic = std::numeric_limits<double>::quiet_NaN();
    result.f_critical = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.f_statistic = ss_within > 0.0 ? (ss_between / df1) / (ss_within / df2)
                                       : std::numeric_limits<double>::infinity();
  boost::math::fisher_f dist(df1, df2);
  result.f_critical = boost::math::quantile(dist, 1.0 - kSignificanceLevel);
  result.significant = result.f_statistic > result.f_critical;
  return result;
}

std::string_view MeasureName(Measure m) {
  switch (m) {
    case Measure::kPearson: return "pearson";
    case Measure::kCramersV: return "cramers_v";
    case Measure::kRSquared: return "r_squared";
  }
  return "pearson";
}

CorrelationModel BuildWeightMatrix(const Dataset& dataset, const BuildOptions& options) {
  if (!dataset.normalized) {
    throw Error(ErrorCode::kInvalidConfig, "build_weight_matrix expects a normalized dataset");
  }
  const std::size_t m = dataset.columns.size();
  if (m < 2) throw Error(ErrorCode::kInvalidConfig, "need at least two concepts");

  std::vector<PairStatistic> pairs;
  pairs.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      PairStatistic p;
      p.i = i;
      p.j = j;
      pairs.push_back(p);
    }
  }
  std::vector<std::string> pair_warnings(pairs.size());

  auto compute = [&](std::size_t k) {
    PairStatistic& p = pairs[k];
    const Column& a = dataset.columns[p.i];
    const Column& b = dataset.columns[p.j];
    const bool a_num = a.kind == FeatureKind::kNumeric;
    const bool b_num = b.kind == FeatureKind::kNumeric;
    try {
      if (a_num && b_num) {
        p.measure = Measure::kPearson;
        const PearsonResult r = Pearson(a.values, b.values);
        p.value = std::abs(r.r);
        p.p_value = r.p;
        p.significant = r.p < kSignificanceLevel;
      } else if (!a_num && !b_num) {
        p.measure = Measure::kCramersV;
        const CramersVResult r = CramersV(a.values, b.values);
        p.value = r.v;
        p.p_value = r.p;
        p.significant = r.p < kSignificanceLevel;
      } else {
        p.measure = Measure::kRSquared;
        const RSquaredResult r =
            a_num ? RSquared(b.values, a.values) : RSquared(a.values, b.values);
        p.value = r.r2;
        p.p_value = std::numeric_limits<double>::quiet_NaN();
        p.significant = r.significant;
      }
    } catch (const Error& e) {
      p.value = 0.0;
      p.p_value = std::numeric_limits<double>::quiet_NaN();
      p.significant = false;
      p.degenerate = true;
      pair_warnings[k] = fmt::format("({}, {}): {}; weight set to 0",
                                     dataset.schema.features[p.i].name,
                                     dataset.schema.features[p.j].name, e.what());
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  if (workers == 1 || pairs.size() < 64) {
    for (std::size_t k = 0; k < pairs.size(); ++k) compute(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < pairs.size(); k = next++) compute(k);
      });
    }
    for (auto& t : pool) t.join();
  }

  CorrelationModel model;
  model.weights = WeightMatrix(dataset.schema.Names());
  std::vector<bool> flags;
  for (const auto& f : dataset.schema.features) flags.push_back(f.is_protected);
  model.weights.set_protected_flags(std::move(flags));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    model.weights.SetSymmetric(pairs[k].i, pairs[k].j, pairs[k].value, pairs[k].significant);
    if (!pair_warnings[k].empty()) model.warnings.push_back(std::move(pair_warnings[k]));
  }
  const double diag = options.diagonal == Diagonal::kOne ? 1.0 : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    model.weights.Set(i, i, diag);
    model.weights.SetSignificant(i, i, diag > 0.0);
  }
  model.pairs = std::move(pairs);
  return model;
}

}  // namespace fcm_bias
