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

// Pairwise association measures for mixed-type data and the weight matrix
// assembled from them.
//
//   numeric - numeric : |Pearson r|, t-test with n-2 degrees of freedom
//   nominal - nominal : Cramer's V, chi-squared test
//   nominal - numeric : R^2 of the one-way group-mean model, F-test
//
// All tests use alpha = 0.05.

#ifndef FCM_BIAS_CORRELATION_H_
#define FCM_BIAS_CORRELATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fcm_bias/ingest.h"
#include "fcm_bias/weight_matrix.h"

namespace fcm_bias {

inline constexpr double kSignificanceLevel = 0.05;

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
};

struct CramersVResult {
  double v = 0.0;
  double p = 1.0;
  double chi_squared = 0.0;
};

struct RSquaredResult {
  double r2 = 0.0;
  double f_statistic = 0.0;
  double f_critical = 0.0;
  bool significant = false;
};

// Throws kLengthMismatch (different lengths or fewer than 3 observations)
// and kConstantColumn.
PearsonResult Pearson(std::span<const double> x, std::span<const double> y);

// `x` and `y` hold category codes. Empty categories are ignored. Throws
// kSingleCategory when either side has fewer than two observed categories.
CramersVResult CramersV(std::span<const double> x, std::span<const double> y);

// `groups` holds category codes, `y` numeric values. Throws kSingleCategory
// or kConstantColumn.
RSquaredResult RSquared(std::span<const double> groups,
                        std::span<const double> y);

// Observed contingency table; rows follow ascending codes of `x`, columns
// ascending codes of `y`. Codes absent from the data get no row/column.
struct ContingencyTable {
  std::vector<double> row_codes;
  std::vector<double> col_codes;
  std::vector<std::vector<double>> counts;

  std::string ToString() const;
};

ContingencyTable Crosstab(std::span<const double> x, std::span<const double> y);

enum class Measure { kPearson, kCramersV, kRSquared };

std::string_view MeasureName(Measure m);

// Per-pair diagnostics kept next to the matrix.
struct PairStatistic {
  std::size_t i = 0;
  std::size_t j = 0;
  Measure measure = Measure::kPearson;
  double value = 0.0;  // stored weight
  double p_value = 1.0;  // NaN for R^2 (decided by F critical value)
  bool significant = false;
  bool degenerate = false;
};

enum class Diagonal { kZero, kOne };

struct BuildOptions {
  Diagonal diagonal = Diagonal::kZero;
};

struct CorrelationModel {
  WeightMatrix weights;
  std::vector<PairStatistic> pairs;  // i < j, row-major order
  // One line per degenerate pair, e.g. constant columns.
  std::vector<std::string> warnings;
};

// Requires a normalized dataset with at least two concepts. Degenerate pairs
// become weight 0, not significant, with a warning. Pairs are independent and
// computed in parallel; the result does not depend on scheduling.
CorrelationModel BuildWeightMatrix(const Dataset& dataset,
                                   const BuildOptions& options = {});

}  // namespace fcm_bias

#endif  // FCM_BIAS_CORRELATION_H_
