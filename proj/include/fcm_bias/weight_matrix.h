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

#ifndef FCM_BIAS_WEIGHT_MATRIX_H_
#define FCM_BIAS_WEIGHT_MATRIX_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fcm_bias {

// Dense row-major M x M matrix of connection strengths between concepts,
// with per-entry significance flags and the concept metadata needed to run
// simulations from a saved file.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::vector<std::string> concept_names);
  // Takes row-major `weights` of size names.size()^2.
  WeightMatrix(std::vector<std::string> concept_names,
               std::vector<double> weights);

  std::size_t size() const { return names_.size(); }

  double at(std::size_t i, std::size_t j) const { return weights_[i * size() + j]; }
  bool significant(std::size_t i, std::size_t j) const {
    return significance_[i * size() + j] != 0;
  }

  void Set(std::size_t i, std::size_t j, double w) { weights_[i * size() + j] = w; }
  // Sets both triangles.
  void SetSymmetric(std::size_t i, std::size_t j, double w, bool significant);
  void SetSignificant(std::size_t i, std::size_t j, bool significant) {
    significance_[i * size() + j] = significant ? 1 : 0;
  }

  std::span<const double> row_major() const { return weights_; }
  const std::vector<std::string>& concept_names() const { return names_; }

  const std::vector<bool>& protected_flags() const { return protected_; }
  void set_protected_flags(std::vector<bool> flags);
  std::vector<std::string> ProtectedNames() const;
  std::vector<std::size_t> ProtectedIndices() const;

  std::optional<std::size_t> Find(std::string_view name) const;

  // Largest |w[i][j] - w[j][i]|.
  double MaxAsymmetry() const;

  bool operator==(const WeightMatrix& other) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> weights_;
  std::vector<char> significance_;
  std::vector<bool> protected_;
};

// {"conceptNames": [...], "weights": [row-major], "significance": [row-major
// bools], "protected": [names]}. Doubles are written in shortest round-trip
// form, so import(export(w)) == w bit for bit.
nlohmann::json WeightMatrixToJson(const WeightMatrix& w);
// Throws Error(kInvalidSchema) naming the offending field.
WeightMatrix WeightMatrixFromJson(const nlohmann::json& json);

// Square CSV with a header of concept names, values at 17 significant digits.
std::string WeightMatrixToCsv(const WeightMatrix& w);
WeightMatrix WeightMatrixFromCsv(std::string_view text);

// One line per unordered pair i < j: source,target,weight,significant.
std::string EdgeListCsv(const WeightMatrix& w);
nlohmann::json EdgeListJson(const WeightMatrix& w);

WeightMatrix LoadWeightMatrix(const std::string& path);

// "%.17g" formatting shared by every CSV writer.
std::string FormatDouble(double value);

}  // namespace fcm_bias

#endif  // FCM_BIAS_WEIGHT_MATRIX_H_
