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

// Tabular ingestion: declared schemas, CSV loading, min-max normalization and
// expansion of protected features into one-hot group concepts.
//
// The usual pipeline is
//
//   FeatureSchema schema = LoadSchema("credit.schema.json");
//   Dataset data = LoadCsv("credit.csv", schema);
//   data = ExpandGroups(data);  // only when the schema declares groups
//   data = Normalize(data);
//
// Group predicates compare raw values, so ExpandGroups must run before
// Normalize.

#ifndef FCM_BIAS_INGEST_H_
#define FCM_BIAS_INGEST_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fcm_bias {

enum class FeatureKind { kNumeric, kNominal };

std::string_view FeatureKindName(FeatureKind kind);

// One comparison against a raw cell value.
struct Condition {
  enum class Op { kLt, kLe, kGt, kGe, kIn };

  Op op = Op::kIn;
  double threshold = 0.0;            // kLt, kLe, kGt, kGe
  std::vector<std::string> members;  // kIn

  bool Matches(double value) const;
  bool Matches(std::string_view label) const;
};

// A group concept; a row belongs to it when every condition holds.
struct GroupSpec {
  std::string label;
  std::vector<Condition> conditions;
};

struct GroupExpansion {
  std::string feature;
  std::vector<GroupSpec> groups;
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  bool is_protected = false;
  // Raw token -> category label, applied to nominal cells before encoding.
  std::map<std::string, std::string> recode;
};

struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::vector<GroupExpansion> group_expansions;

  // Throws Error(kInvalidSchema): empty or duplicate names, no protected or
  // no unprotected feature, expansions of unknown or unprotected features.
  void Validate() const;

  std::optional<std::size_t> Find(std::string_view name) const;
  std::vector<std::string> Names() const;
  std::vector<std::string> ProtectedNames() const;
};

// JSON layout: {"features": [{name, kind, protected, recode?}],
//               "group_expansions": [{feature, groups: [{label, op, value} |
//                                                      {label, all: [...]}]}]}
// Errors name the offending field, e.g. "features[3].kind".
FeatureSchema SchemaFromJson(const nlohmann::json& json);
nlohmann::json SchemaToJson(const FeatureSchema& schema);
FeatureSchema LoadSchema(const std::string& path);

struct Column {
  FeatureKind kind = FeatureKind::kNumeric;
  // Real values for numeric columns, category codes for nominal ones.
  std::vector<double> values;
  // Nominal dictionary: code -> label, in first-appearance order.
  std::vector<std::string> categories;

  std::string Decode(std::size_t row) const;
  // Number of distinct codes present in `values`.
  std::size_t ObservedCategories() const;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<Column> columns;  // parallel to schema.features
  std::size_t row_count = 0;
  bool normalized = false;
};

enum class MissingPolicy { kDrop, kStrict };

struct LoadOptions {
  char delimiter = ',';
  MissingPolicy missing = MissingPolicy::kDrop;
  std::vector<std::string> missing_tokens = {"", "NA"};
};

// Header columns not named in the schema (e.g. a class label) are ignored.
// Errors: kMissingColumn, kTypeMismatch, kMissingValue (strict policy, nominal
// cell), kEmptyDataset. Messages carry the 1-based line number.
Dataset ParseCsv(std::string_view text, const FeatureSchema& schema,
                 const LoadOptions& options = {});
Dataset LoadCsv(const std::string& path, const FeatureSchema& schema,
                const LoadOptions& options = {});

// Min-max scales numeric columns into [0, 1]; constant columns become zeros.
Dataset Normalize(const Dataset& dataset);

// Replaces each expanded protected feature by one {0,1} indicator concept per
// group, inserted at the feature's position in declared order. Indicators are
// nominal and protected. Throws kNonExhaustivePredicate when a row matches
// no group and kInvalidSchema when it matches several.
Dataset ExpandGroups(const Dataset& dataset,
                     const std::vector<GroupExpansion>& expansions);
// Uses the expansions declared by the dataset's own schema.
Dataset ExpandGroups(const Dataset& dataset);

}  // namespace fcm_bias

#endif  // FCM_BIAS_INGEST_H_
