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

#include "fcm_bias/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "fcm_bias/csv.h"
#include "fcm_bias/error.h"

namespace fcm_bias {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaError(const std::string& field,
                              const std::string& what) {
  throw Error(ErrorCode::kInvalidSchema, field + ": " + what);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> ParseNumber(std::string_view token) {
  token = Trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

Condition::Op ParseOp(const std::string& op, const std::string& field) {
  if (op == "lt") return Condition::Op::kLt;
  if (op == "le") return Condition::Op::kLe;
  if (op == "gt") return Condition::Op::kGt;
  if (op == "ge") return Condition::Op::kGe;
  if (op == "in") return Condition::Op::kIn;
  SchemaError(field, "unknown op '" + op + "' (expected lt|le|gt|ge|in)");
}

std::string_view OpName(Condition::Op op) {
  switch (op) {
    case Condition::Op::kLt: return "lt";
    case Condition::Op::kLe: return "le";
    case Condition::Op::kGt: return "gt";
    case Condition::Op::kGe: return "ge";
    case Condition::Op::kIn: return "in";
  }
  return "in";
}

Condition ConditionFromJson(const json& j, const std::string& field) {
  if (!j.is_object()) SchemaError(field, "expected an object");
  if (!j.contains("op") || !j["op"].is_string()) {
    SchemaError(field + ".op", "missing or not a string");
  }
  Condition cond;
  cond.op = ParseOp(j["op"].get<std::string>(), field + ".op");
  if (!j.contains("value")) SchemaError(field + ".value", "missing");
  const json& value = j["value"];
  if (cond.op == Condition::Op::kIn) {
    const json list = value.is_array() ? value : json::array({value});
    for (const json& member : list) {
      if (member.is_string()) {
        cond.members.push_back(member.get<std::string>());
      } else if (member.is_number()) {
        cond.members.push_back(member.dump());
      } else {
        SchemaError(field + ".value", "'in' members must be strings or numbers");
      }
    }
    if (cond.members.empty()) SchemaError(field + ".value", "empty 'in' list");
  } else {
    if (!value.is_number()) SchemaError(field + ".value", "expected a number");
    cond.threshold = value.get<double>();
  }
  return cond;
}

json ConditionToJson(const Condition& cond) {
  json j = {{"op", OpName(cond.op)}};
  if (cond.op == Condition::Op::kIn) {
    j["value"] = cond.members;
  } else {
    j["value"] = cond.threshold;
  }
  return j;
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kNumeric ? "numeric" : "nominal";
}

bool Condition::Matches(double value) const {
  switch (op) {
    case Op::kLt: return value < threshold;
    case Op::kLe: return value <= threshold;
    case Op::kGt: return value > threshold;
    case Op::kGe: return value >= threshold;
    case Op::kIn:
      return std::any_of(members.begin(), members.end(),
                         [value](const std::string& m) {
                           const auto parsed = ParseNumber(m);
                           return parsed && *parsed == value;
                         });
  }
  return false;
}

bool Condition::Matches(std::string_view label) const {
  if (op == Op::kIn) {
    return std::find(members.begin(), members.end(), label) != members.end();
  }
  const auto parsed = ParseNumber(label);
  return parsed && Matches(*parsed);
}

void FeatureSchema::Validate() const {
  std::set<std::string, std::less<>> seen;
  bool any_protected = false;
  bool any_unprotected = false;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string field = "features[" + std::to_string(i) + "]";
    if (features[i].name.empty()) SchemaError(field + ".name", "empty name");
    if (!seen.insert(features[i].name).second) {
      SchemaError(field + ".name", "duplicate name '" + features[i].name + "'");
    }
    (features[i].is_protected ? any_protected : any_unprotected) = true;
  }
  if (!any_protected) SchemaError("features", "no protected feature");
  if (!any_unprotected) SchemaError("features", "no unprotected feature");

  std::set<std::string, std::less<>> expanded;
  for (std::size_t e = 0; e < group_expansions.size(); ++e) {
    const GroupExpansion& exp = group_expansions[e];
    const std::string field = "group_expansions[" + std::to_string(e) + "]";
    const auto index = Find(exp.feature);
    if (!index) SchemaError(field + ".feature", "unknown feature '" + exp.feature + "'");
    if (!features[*index].is_protected) {
      SchemaError(field + ".feature",
                  "'" + exp.feature + "' is not protected; only protected "
                  "features can be expanded");
    }
    if (!expanded.insert(exp.feature).second) {
      SchemaError(field + ".feature", "'" + exp.feature + "' expanded twice");
    }
    if (exp.groups.empty()) SchemaError(field + ".groups", "no groups");
    for (std::size_t g = 0; g < exp.groups.size(); ++g) {
      const std::string gfield = field + ".groups[" + std::to_string(g) + "]";
      const std::string& label = exp.groups[g].label;
      if (label.empty()) SchemaError(gfield + ".label", "empty label");
      if (exp.groups[g].conditions.empty()) {
        SchemaError(gfield, "group has no condition");
      }
      // Indicators join the concept namespace.
      if (!seen.insert(label).second) {
        SchemaError(gfield + ".label", "duplicate concept name '" + label + "'");
      }
    }
  }
}

std::optional<std::size_t> FeatureSchema::Find(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::Names() const {
  std::vector<std::string> names;
  names.reserve(features.size());
  for (const auto& f : features) names.push_back(f.name);
  return names;
}

std::vector<std::string> FeatureSchema::ProtectedNames() const {
  std::vector<std::string> names;
  for (const auto& f : features) {
    if (f.is_protected) names.push_back(f.name);
  }
  return names;
}

FeatureSchema SchemaFromJson(const json& j) {
  if (!j.is_object()) SchemaError("schema", "expected a JSON object");
  if (!j.contains("features") || !j["features"].is_array()) {
    SchemaError("features", "missing or not an array");
  }
  FeatureSchema schema;
  const json& features = j["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string field = "features[" + std::to_string(i) + "]";
    const json& f = features[i];
    if (!f.is_object()) SchemaError(field, "expected an object");
    FeatureSpec spec;
    if (!f.contains("name") || !f["name"].is_string()) {
      SchemaError(field + ".name", "missing or not a string");
    }
    spec.name = f["name"].get<std::string>();
    if (!f.contains("kind") || !f["kind"].is_string()) {
      SchemaError(field + ".kind", "missing or not a string");
    }
    const std::string kind = f["kind"].get<std::string>();
    if (kind == "numeric") {
      spec.kind = FeatureKind::kNumeric;
    } else if (kind == "nominal") {
      spec.kind = FeatureKind::kNominal;
    } else {
      SchemaError(field + ".kind",
                  "unknown kind '" + kind + "' (expected numeric|nominal)");
    }
    if (f.contains("protected")) {
      if (!f["protected"].is_boolean()) {
        SchemaError(field + ".protected", "expected a boolean");
      }
      spec.is_protected = f["protected"].get<bool>();
    }
    if (f.contains("recode")) {
      if (!f["recode"].is_object()) SchemaError(field + ".recode", "expected an object");
      if (spec.kind != FeatureKind::kNominal) {
        SchemaError(field + ".recode", "only nominal features can be recoded");
      }
      for (const auto& [from, to] : f["recode"].items()) {
        if (!to.is_string()) {
          SchemaError(field + ".recode." + from, "expected a string");
        }
        spec.recode[from] = to.get<std::string>();
      }
    }
    schema.features.push_back(std::move(spec));
  }

  if (j.contains("group_expansions")) {
    const json& exps = j["group_expansions"];
    if (!exps.is_array()) SchemaError("group_expansions", "expected an array");
    for (std::size_t e = 0; e < exps.size(); ++e) {
      const std::string field = "group_expansions[" + std::to_string(e) + "]";
      const json& x = exps[e];
      if (!x.is_object()) SchemaError(field, "expected an object");
      GroupExpansion exp;
      if (!x.contains("feature") || !x["feature"].is_string()) {
        SchemaError(field + ".feature", "missing or not a string");
      }
      exp.feature = x["feature"].get<std::string>();
      if (!x.contains("groups") || !x["groups"].is_array()) {
        SchemaError(field + ".groups", "missing or not an array");
      }
      for (std::size_t g = 0; g < x["groups"].size(); ++g) {
        const std::string gfield = field + ".groups[" + std::to_string(g) + "]";
        const json& gj = x["groups"][g];
        if (!gj.is_object()) SchemaError(gfield, "expected an object");
        GroupSpec group;
        if (!gj.contains("label") || !gj["label"].is_string()) {
          SchemaError(gfield + ".label", "missing or not a string");
        }
        group.label = gj["label"].get<std::string>();
        if (gj.contains("all")) {
          if (!gj["all"].is_array()) SchemaError(gfield + ".all", "expected an array");
          for (std::size_t c = 0; c < gj["all"].size(); ++c) {
            group.conditions.push_back(ConditionFromJson(
                gj["all"][c], gfield + ".all[" + std::to_string(c) + "]"));
          }
        } else {
          group.conditions.push_back(ConditionFromJson(gj, gfield));
        }
        exp.groups.push_back(std::move(group));
      }
      schema.group_expansions.push_back(std::move(exp));
    }
  }
  schema.Validate();
  return schema;
}

json SchemaToJson(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features) {
    json fj = {{"name", f.name},
               {"kind", FeatureKindName(f.kind)},
               {"protected", f.is_protected}};
    if (!f.recode.empty()) fj["recode"] = f.recode;
    features.push_back(std::move(fj));
  }
  json out = {{"features", std::move(features)}};
  if (!schema.group_expansions.empty()) {
    json exps = json::array();
    for (const auto& exp : schema.group_expansions) {
      json groups = json::array();
      for (const auto& g : exp.groups) {
        if (g.conditions.size() == 1) {
          json gj = ConditionToJson(g.conditions.front());
          gj["label"] = g.label;
          groups.push_back(std::move(gj));
        } else {
          json all = json::array();
          for (const auto& c : g.conditions) all.push_back(ConditionToJson(c));
          groups.push_back({{"label", g.label}, {"all", std::move(all)}});
        }
      }
      exps.push_back({{"feature", exp.feature}, {"groups", std::move(groups)}});
    }
    out["group_expansions"] = std::move(exps);
  }
  return out;
}

FeatureSchema LoadSchema(const std::string& path) {
  const std::string text = csv::ReadFile(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidSchema,
                path + ": malformed JSON: " + e.what());
  }
  try {
    return SchemaFromJson(j);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string Column::Decode(std::size_t row) const {
  if (kind == FeatureKind::kNominal) {
    return categories.at(static_cast<std::size_t>(values.at(row)));
  }
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), values.at(row));
  return std::string(buffer, ptr);
}

std::size_t Column::ObservedCategories() const {
  std::set<double> distinct(values.begin(), values.end());
  return distinct.size();
}

Dataset ParseCsv(std::string_view text, const FeatureSchema& schema,
                 const LoadOptions& options) {
  schema.Validate();
  const std::vector<csv::Record> records = csv::Parse(text, options.delimiter);
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "line 1: missing header row");
  }
  const csv::Record& header = records.front();

  // Schema feature -> CSV field index.
  std::vector<std::size_t> source(schema.features.size());
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    const std::string& name = schema.features[f].name;
    const auto it = std::find_if(
        header.fields.begin(), header.fields.end(),
        [&](const std::string& h) { return Trim(h) == name; });
    if (it == header.fields.end()) {
      throw Error(ErrorCode::kMissingColumn,
                  "line " + std::to_string(header.line) +
                      ": header has no column '" + name + "'");
    }
    source[f] = static_cast<std::size_t>(it - header.fields.begin());
  }

  auto is_missing = [&](std::string_view cell) {
    const auto t = Trim(cell);
    return std::find(options.missing_tokens.begin(), options.missing_tokens.end(),
                     t) != options.missing_tokens.end();
  };

  Dataset data;
  data.schema = schema;
  data.columns.resize(schema.features.size());
  std::vector<std::unordered_map<std::string, std::size_t>> dictionaries(
      schema.features.size());
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    data.columns[f].kind = schema.features[f].kind;
  }

  std::vector<double> row_values(schema.features.size());
  std::vector<std::string> row_labels(schema.features.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const csv::Record& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line);
    if (rec.fields.size() != header.fields.size()) {
      throw Error(ErrorCode::kTypeMismatch,
                  where + ": expected " + std::to_string(header.fields.size()) +
                      " fields, found " + std::to_string(rec.fields.size()));
    }
    bool drop = false;
    for (std::size_t f = 0; f < schema.features.size() && !drop; ++f) {
      const FeatureSpec& spec = schema.features[f];
      const std::string& cell = rec.fields[source[f]];
      if (is_missing(cell)) {
        if (options.missing == MissingPolicy::kDrop) {
          drop = true;
          break;
        }
        throw Error(spec.kind == FeatureKind::kNumeric ? ErrorCode::kTypeMismatch
                                                       : ErrorCode::kMissingValue,
                    where + ": missing value in column '" + spec.name + "'");
      }
      if (spec.kind == FeatureKind::kNumeric) {
        const auto value = ParseNumber(cell);
        if (!value) {
          throw Error(ErrorCode::kTypeMismatch,
                      where + ": column '" + spec.name +
                          "' expects a number, found '" + cell + "'");
        }
        row_values[f] = *value;
      } else {
        std::string label(Trim(cell));
        if (const auto it = spec.recode.find(label); it != spec.recode.end()) {
          label = it->second;
        }
        row_labels[f] = std::move(label);
      }
    }
    if (drop) continue;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
      Column& col = data.columns[f];
      if (col.kind == FeatureKind::kNumeric) {
        col.values.push_back(row_values[f]);
        continue;
      }
      auto [it, inserted] =
          dictionaries[f].try_emplace(row_labels[f], col.categories.size());
      if (inserted) col.categories.push_back(row_labels[f]);
      col.values.push_back(static_cast<double>(it->second));
    }
    ++data.row_count;
  }
  if (data.row_count == 0) {
    throw Error(ErrorCode::kEmptyDataset, "no complete data rows");
  }
  return data;
}

Dataset LoadCsv(const std::string& path, const FeatureSchema& schema,
                const LoadOptions& options) {
  const std::string text = csv::ReadFile(path);
  try {
    return ParseCsv(text, schema, options);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

Dataset Normalize(const Dataset& dataset) {
  Dataset out = dataset;
  for (Column& col : out.columns) {
    if (col.kind != FeatureKind::kNumeric || col.values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(col.values.begin(), col.values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (double& v : col.values) {
      v = range > 0.0 ? (v - min) / range : 0.0;
    }
  }
  out.normalized = true;
  return out;
}

Dataset ExpandGroups(const Dataset& dataset,
                     const std::vector<GroupExpansion>& expansions) {
  if (expansions.empty()) return dataset;
  if (dataset.normalized) {
    throw Error(ErrorCode::kInvalidSchema,
                "group predicates compare raw values; expand before normalizing");
  }
  FeatureSchema check = dataset.schema;
  check.group_expansions = expansions;
  check.Validate();

  Dataset out;
  out.row_count = dataset.row_count;
  for (std::size_t f = 0; f < dataset.schema.features.size(); ++f) {
    const FeatureSpec& spec = dataset.schema.features[f];
    const Column& col = dataset.columns[f];
    const auto exp = std::find_if(
        expansions.begin(), expansions.end(),
        [&](const GroupExpansion& e) { return e.feature == spec.name; });
    if (exp == expansions.end()) {
      out.schema.features.push_back(spec);
      out.columns.push_back(col);
      continue;
    }

    std::vector<Column> indicators(exp->groups.size());
    for (Column& ind : indicators) {
      ind.kind = FeatureKind::kNominal;
      ind.categories = {"0", "1"};
      ind.values.assign(dataset.row_count, 0.0);
    }
    for (std::size_t r = 0; r < dataset.row_count; ++r) {
      std::size_t matches = 0;
      for (std::size_t g = 0; g < exp->groups.size(); ++g) {
        const auto& conds = exp->groups[g].conditions;
        const bool hit = std::all_of(conds.begin(), conds.end(), [&](const Condition& c) {
          return col.kind == FeatureKind::kNumeric ? c.Matches(col.values[r])
                                                   : c.Matches(col.Decode(r));
        });
        if (hit) {
          indicators[g].values[r] = 1.0;
          ++matches;
        }
      }
      if (matches == 0) {
        throw Error(ErrorCode::kNonExhaustivePredicate,
                    "feature '" + spec.name + "': value '" + col.Decode(r) +
                        "' (row " + std::to_string(r + 1) + ") matches no group");
      }
      if (matches > 1) {
        throw Error(ErrorCode::kInvalidSchema,
                    "feature '" + spec.name + "': value '" + col.Decode(r) +
                        "' matches several groups");
      }
    }
    for (std::size_t g = 0; g < exp->groups.size(); ++g) {
      FeatureSpec ind_spec;
      ind_spec.name = exp->groups[g].label;
      ind_spec.kind = FeatureKind::kNominal;
      ind_spec.is_protected = true;
      out.schema.features.push_back(std::move(ind_spec));
      out.columns.push_back(std::move(indicators[g]));
    }
  }
  return out;
}

Dataset ExpandGroups(const Dataset& dataset) {
  return ExpandGroups(dataset, dataset.schema.group_expansions);
}

}  // namespace fcm_bias
