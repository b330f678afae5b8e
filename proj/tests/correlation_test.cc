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

#include <random>

#include <gtest/gtest.h>

#include "fcm_bias/correlation.h"
#include "fcm_bias/error.h"
#include "oracles.h"
#include "test_util.h"

namespace fcm_bias {
namespace {

using nlohmann::json;

TEST(PearsonTest, PerfectCorrelation) {
  const std::vector<double> x = {1, 2, 3};
  const PearsonResult r = Pearson(x, x);
  EXPECT_DOUBLE_EQ(r.r, 1.0);
  EXPECT_LT(r.p, 0.05);
  const std::vector<double> y = {3, 2, 1};
  EXPECT_DOUBLE_EQ(Pearson(x, y).r, -1.0);
}

TEST(PearsonTest, ReferenceValues) {
  // scipy.stats.pearsonr on the same vectors.
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y = {2, 1, 4, 3, 7, 5, 8, 6};
  const PearsonResult r = Pearson(x, y);
  EXPECT_NEAR(r.r, 0.8333333333333333, 1e-14);
  EXPECT_NEAR(r.p, 0.010175540123456802, 1e-12);
}

TEST(PearsonTest, MatchesOracleOnRandomData) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200), y(200);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = n(rng);
      y[k] = 0.3 * x[k] + n(rng);
    }
    EXPECT_NEAR(Pearson(x, y).r, oracle::Pearson(x, y), 1e-12);
  }
}

TEST(PearsonTest, Degenerate) {
  const std::vector<double> c = {5, 5, 5}, x = {1, 2, 3};
  EXPECT_THROW(Pearson(c, x), Error);
  const std::vector<double> shorter = {1, 2};
  try {
    Pearson(x, shorter);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(CramersVTest, PerfectAssociationAndIndependence) {
  const std::vector<double> x = {0, 1, 2, 0, 1, 2};
  EXPECT_NEAR(CramersV(x, x).v, 1.0, 1e-15);
  const std::vector<double> a = {0, 0, 1, 1}, b = {0, 1, 0, 1};
  const CramersVResult r = CramersV(a, b);
  EXPECT_EQ(r.v, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-15);
}

TEST(CramersVTest, ReferenceChiSquared) {
  // Table [[3,1],[1,4],[1,2]]: scipy chi2_contingency without correction.
  const std::vector<double> a = {0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2};
  const std::vector<double> b = {0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1};
  const CramersVResult r = CramersV(a, b);
  EXPECT_NEAR(r.chi_squared, 2.88, 1e-12);
  EXPECT_NEAR(r.p, 0.2369277586821218, 1e-12);
  EXPECT_NEAR(r.v, std::sqrt(2.88 / 12.0), 1e-14);
  const ContingencyTable t = Crosstab(a, b);
  EXPECT_EQ(t.counts, (std::vector<std::vector<double>>{{3, 1}, {1, 4}, {1, 2}}));
}

TEST(CramersVTest, MatchesOracleOnRandomData) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> ka(0, 2 + trial % 3), kb(0, 1 + trial % 4);
    std::vector<double> x(300), y(300);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = ka(rng);
      y[k] = (kb(rng) + (x[k] > 1 ? 1 : 0)) % (2 + trial % 4);
    }
    const CramersVResult r = CramersV(x, y);
    EXPECT_NEAR(r.chi_squared, oracle::ChiSquared(x, y), 1e-9);
    EXPECT_NEAR(r.v, oracle::CramersV(x, y), 1e-12);
  }
}

TEST(CramersVTest, SingleCategory) {
  const std::vector<double> a = {1, 1, 1}, b = {0, 1, 0};
  try {
    CramersV(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleCategory);
  }
}

TEST(RSquaredTest, Extremes) {
  const std::vector<double> g = {0, 0, 1, 1, 2, 2};
  const std::vector<double> separated = {1, 1, 2, 2, 3, 3};
  EXPECT_DOUBLE_EQ(RSquared(g, separated).r2, 1.0);
  EXPECT_TRUE(RSquared(g, separated).significant);
  const std::vector<double> equal_means = {1, 3, 3, 1, 2, 2};
  EXPECT_NEAR(RSquared(g, equal_means).r2, 0.0, 1e-15);
  EXPECT_FALSE(RSquared(g, equal_means).significant);
}

TEST(RSquaredTest, ReferenceFStatistic) {
  // scipy.stats.f_oneway([1,2,3],[2,3,4],[5,6,5,7]) and f.ppf(0.95, 2, 7).
  const std::vector<double> g = {0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<double> y = {1, 2, 3, 2, 3, 4, 5, 6, 5, 7};
  const RSquaredResult r = RSquared(g, y);
  EXPECT_NEAR(r.f_statistic, 13.922222222222222, 1e-12);
  EXPECT_NEAR(r.f_critical, 4.73741412777588, 1e-10);
  EXPECT_TRUE(r.significant);
}

TEST(RSquaredTest, ConstantNumeric) {
  const std::vector<double> g = {0, 1, 0}, y = {2, 2, 2};
  try {
    RSquared(g, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantColumn);
  }
}

FeatureSchema Schema(const std::string& text) { return SchemaFromJson(json::parse(text)); }

TEST(BuildWeightMatrixTest, IdenticalNumericColumns) {
  const FeatureSchema s = Schema(R"({"features": [
      {"name": "a", "kind": "numeric", "protected": true},
      {"name": "b", "kind": "numeric"}]})");
  const CorrelationModel m = BuildWeightMatrix(Normalize(ParseCsv("a,b\n1,1\n2,2\n4,4\n", s)));
  EXPECT_EQ(m.weights.row_major().size(), 4u);
  EXPECT_EQ(m.weights.at(0, 1), 1.0);
  EXPECT_EQ(m.weights.at(1, 0), 1.0);
  EXPECT_EQ(m.weights.at(0, 0), 0.0);
  EXPECT_EQ(m.weights.at(1, 1), 0.0);
}

TEST(BuildWeightMatrixTest, DegeneratePairsWarn) {
  const FeatureSchema s = Schema(R"({"features": [
      {"name": "a", "kind": "numeric", "protected": true},
      {"name": "k", "kind": "numeric"},
      {"name": "c", "kind": "nominal"}]})");
  const CorrelationModel m =
      BuildWeightMatrix(Normalize(ParseCsv("a,k,c\n1,5,x\n2,5,x\n3,5,x\n", s)));
  EXPECT_EQ(m.weights.at(0, 1), 0.0);
  EXPECT_FALSE(m.weights.significant(0, 1));
  EXPECT_EQ(m.warnings.size(), 3u);  // (a,k), (a,c), (k,c)
}

TEST(BuildWeightMatrixTest, DiagonalOption) {
  const FeatureSchema s = Schema(R"({"features": [
      {"name": "a", "kind": "numeric", "protected": true},
      {"name": "b", "kind": "numeric"}]})");
  BuildOptions o;
  o.diagonal = Diagonal::kOne;
  const CorrelationModel m = BuildWeightMatrix(Normalize(ParseCsv("a,b\n1,3\n2,1\n4,4\n", s)), o);
  EXPECT_EQ(m.weights.at(0, 0), 1.0);
  EXPECT_EQ(m.weights.at(1, 1), 1.0);
}

TEST(BuildWeightMatrixTest, RequiresNormalizedData) {
  const FeatureSchema s = Schema(R"({"features": [
      {"name": "a", "kind": "numeric", "protected": true},
      {"name": "b", "kind": "numeric"}]})");
  EXPECT_THROW(BuildWeightMatrix(ParseCsv("a,b\n1,3\n2,1\n4,4\n", s)), Error);
}

TEST(BuildWeightMatrixTest, GermanCreditMatchesOracles) {
  const FeatureSchema s = LoadSchema(testing::DataPath("german_credit.schema.json"));
  const Dataset d = Normalize(LoadCsv(testing::DataPath("german_credit.csv"), s));
  const CorrelationModel m = BuildWeightMatrix(d);
  ASSERT_EQ(m.weights.size(), 20u);
  EXPECT_EQ(m.weights.MaxAsymmetry(), 0.0);
  EXPECT_TRUE(m.warnings.empty());
  for (const PairStatistic& p : m.pairs) {
    const auto& x = d.columns[p.i].values;
    const auto& y = d.columns[p.j].values;
    if (p.measure == Measure::kPearson) {
      EXPECT_NEAR(p.value, std::abs(oracle::Pearson(x, y)), 1e-12);
    } else if (p.measure == Measure::kCramersV) {
      EXPECT_NEAR(p.value, oracle::CramersV(x, y), 1e-12);
    }
    EXPECT_GE(p.value, 0.0);
    EXPECT_LE(p.value, 1.0);
  }
  const std::size_t age = *m.weights.Find("age");
  EXPECT_NEAR(m.weights.at(age, *m.weights.Find("existing_credits")), 0.15, 0.02);
}

}  // namespace
}  // namespace fcm_bias
