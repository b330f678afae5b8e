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

#include "fcm_bias/weight_matrix.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"

namespace fcm_bias {
namespace {

using nlohmann::json;

[[noreturn]] void FormatError(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidSchema, field + ": " + what);
}

}  // namespace

WeightMatrix::WeightMatrix(std::vector<std::string> concept_names)
    : names_(std::move(concept_names)),
      weights_(names_.size() * names_.size(), 0.0),
      significance_(names_.size() * names_.size(), 0),
      protected_(names_.size(), false) {}

WeightMatrix::WeightMatrix(std::vector<std::string> concept_names,
                           std::vector<double> weights)
    : WeightMatrix(std::move(concept_names)) {
  if (weights.size() != weights_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weight matrix needs " + std::to_string(weights_.size()) +
                    " entries, got " + std::to_string(weights.size()));
  }
  weights_ = std::move(weights);
}

void WeightMatrix::SetSymmetric(std::size_t i, std::size_t j, double w,
                                bool significant) {
  Set(i, j, w);
  Set(j, i, w);
  SetSignificant(i, j, significant);
  SetSignificant(j, i, significant);
}

void WeightMatrix::set_protected_flags(std::vector<bool> flags) {
  if (flags.size() != size()) {
    throw Error(ErrorCode::kDimensionMismatch, "protected flag count differs from M");
  }
  protected_ = std::move(flags);
}

std::vector<std::string> WeightMatrix::ProtectedNames() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (protected_[i]) out.push_back(names_[i]);
  }
  return out;
}

std::vector<std::size_t> WeightMatrix::ProtectedIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (protected_[i]) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> WeightMatrix::Find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

double WeightMatrix::MaxAsymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
    }
  }
  return worst;
}

json WeightMatrixToJson(const WeightMatrix& w) {
  json sig = json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) sig.push_back(w.significant(i, j));
  }
  return {{"conceptNames", w.concept_names()},
          {"weights", std::vector<double>(w.row_major().begin(), w.row_major().end())},
          {"significance", std::move(sig)},
          {"protected", w.ProtectedNames()}};
}

WeightMatrix WeightMatrixFromJson(const json& j) {
  if (!j.is_object()) FormatError("weights file", "expected a JSON object");
  if (!j.contains("conceptNames") || !j["conceptNames"].is_array()) {
    FormatError("conceptNames", "missing or not an array");
  }
  std::vector<std::string> names;
  for (const auto& n : j["conceptNames"]) {
    if (!n.is_string()) FormatError("conceptNames", "expected strings");
    names.push_back(n.get<std::string>());
  }
  const std::size_t m = names.size();
  if (m == 0) FormatError("conceptNames", "empty");
  if (!j.contains("weights") || !j["weights"].is_array()) {
    FormatError("weights", "missing or not an array");
  }
  std::vector<double> weights;
  for (const auto& v : j["weights"]) {
    if (!v.is_number()) FormatError("weights", "expected numbers");
    weights.push_back(v.get<double>());
  }
  if (weights.size() != m * m) {
    FormatError("weights", "expected " + std::to_string(m * m) + " entries, found " +
                               std::to_string(weights.size()));
  }
  WeightMatrix w(std::move(names), std::move(weights));
  if (j.contains("significance")) {
    const json& sig = j["significance"];
    if (!sig.is_array() || sig.size() != m * m) {
      FormatError("significance", "expected " + std::to_string(m * m) + " booleans");
    }
    for (std::size_t k = 0; k < m * m; ++k) {
      if (!sig[k].is_boolean()) FormatError("significance", "expected booleans");
      w.SetSignificant(k / m, k % m, sig[k].get<bool>());
    }
  }
  if (j.contains("protected")) {
    if (!j["protected"].is_array()) FormatError("protected", "expected an array");
    std::vector<bool> flags(m, false);
    for (const auto& p : j["protected"]) {
      if (!p.is_string()) FormatError("protected", "expected concept names");
      const auto idx = w.Find(p.get<std::string>());
      if (!idx) FormatError("protected", "unknown concept '" + p.get<std::string>() + "'");
      flags[*idx] = true;
    }
    w.set_protected_flags(std::move(flags));
  }
  return w;
}

std::string FormatDouble(double value) { return fmt::format("{:.17g}", value); }

std::string WeightMatrixToCsv(const WeightMatrix& w) {
  std::string out = csv::JoinRow(w.concept_names()) + "\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) row.push_back(FormatDouble(w.at(i, j)));
    out += csv::JoinRow(row) + "\n";
  }
  return out;
}

WeightMatrix WeightMatrixFromCsv(std::string_view text) {
  const auto records = csv::Parse(text);
  if (records.empty()) FormatError("weights csv", "missing header");
  const std::vector<std::string>& names = records.front().fields;
  const std::size_t m = names.size();
  if (records.size() != m + 1) {
    FormatError("weights csv", "expected " + std::to_string(m) + " rows, found " +
                                   std::to_string(records.size() - 1));
  }
  std::vector<double> weights;
  weights.reserve(m * m);
  for (std::size_t r = 1; r <= m; ++r) {
    const auto& fields = records[r].fields;
    if (fields.size() != m) {
      FormatError("line " + std::to_string(records[r].line), "expected " +
                                                                 std::to_string(m) + " values");
    }
    for (const std::string& f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        FormatError("line " + std::to_string(records[r].line), "bad number '" + f + "'");
      }
      weights.push_back(v);
    }
  }
  return WeightMatrix(names, std::move(weights));
}

std::string EdgeListCsv(const WeightMatrix& w) {
  std::string out = "source,target,weight,significant\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      out += csv::JoinRow({w.concept_names()[i], w.concept_names()[j],
                           FormatDouble(w.at(i, j)),
                           w.significant(i, j) ? "true" : "false"}) +
             "\n";
    }
  }
  return out;
}

json EdgeListJson(const WeightMatrix& w) {
  json edges = json::array();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      edges.push_back({{"source", w.concept_names()[i]},
                       {"target", w.concept_names()[j]},
                       {"weight", w.at(i, j)},
                       {"significant", w.significant(i, j)},
                       {"protected", w.protected_flags()[i] || w.protected_flags()[j]}});
    }
  }
  return {{"conceptNames", w.concept_names()},
          {"protected", w.ProtectedNames()},
          {"edges", std::move(edges)}};
}

WeightMatrix LoadWeightMatrix(const std::string& path) {
  const std::string text = csv::ReadFile(path);
  const bool looks_json =
      text.find_first_not_of(" \t\r\n") != std::string::npos &&
      text[text.find_first_not_of(" \t\r\n")] == '{';
  try {
    if (looks_json) {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kInvalidSchema, std::string("malformed JSON: ") + e.what());
      }
      return WeightMatrixFromJson(j);
    }
    return WeightMatrixFromCsv(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace fcm_bias
