/* Copyright 2026 The AFD-Sizing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "afd/model.h"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.h"

namespace afd {
namespace {

using testing::TableCoeffs;

TEST(LatencyCoefficientsTest, ReferenceMatchesTableValues) {
  EXPECT_EQ(LatencyCoefficients::Reference(), TableCoeffs());
}

TEST(LatencyCoefficientsTest, RejectsInvalidValues) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LatencyCoefficients::Create(0, 50, 0.083, 100, 0.022, 20),
               std::invalid_argument);
  EXPECT_THROW(LatencyCoefficients::Create(0.1, 50, -1, 100, 0.022, 20),
               std::invalid_argument);
  EXPECT_THROW(LatencyCoefficients::Create(0.1, -1, 0.1, 100, 0.022, 20),
               std::invalid_argument);
  EXPECT_THROW(LatencyCoefficients::Create(nan, 50, 0.1, 100, 0.022, 20),
               std::invalid_argument);
  EXPECT_THROW(LatencyCoefficients::Create(0.1, 50, 0.1, inf, 0.022, 20),
               std::invalid_argument);
  EXPECT_THROW(LatencyCoefficients::Create(0.1, 50, 0.1, 100, -0.5, 20),
               std::invalid_argument);
}

TEST(LatencyCoefficientsTest, ErrorNamesTheField) {
  try {
    LatencyCoefficients::Create(0.1, 50, 0.1, 100, 0.022, -3);
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("beta_C"), std::string::npos);
  }
}

TEST(LatencyTest, AttentionExamples) {
  const auto c = TableCoeffs();
  EXPECT_NEAR(AttentionLatency(c, 150323.2), 0.00165 * 150323.2 + 50, 1e-9);
  EXPECT_NEAR(AttentionLatency(c, 150323.2), 298.033, 1e-3);
  EXPECT_DOUBLE_EQ(AttentionLatency(c, 0), 50.0);
  const auto unit = LatencyCoefficients::Create(1, 0, 1, 0, 1, 0);
  EXPECT_DOUBLE_EQ(AttentionLatency(unit, 7), 7.0);
}

TEST(LatencyTest, FfnExamples) {
  const auto c = TableCoeffs();
  EXPECT_NEAR(FfnLatency(c, 2560), 312.48, 1e-9);
  EXPECT_DOUBLE_EQ(FfnLatency(c, 0), 100.0);
  const auto k = LatencyCoefficients::Create(1, 0, 2, 1, 1, 0);
  EXPECT_DOUBLE_EQ(FfnLatency(k, 3), 7.0);
}

TEST(LatencyTest, CommExamples) {
  const auto c = TableCoeffs();
  EXPECT_NEAR(CommLatency(c, 256), 25.632, 1e-12);
  EXPECT_DOUBLE_EQ(CommLatency(c, 0), 20.0);
  const auto flat = LatencyCoefficients::Create(1, 0, 1, 0, 0, 5);
  EXPECT_DOUBLE_EQ(CommLatency(flat, 99), 5.0);
}

TEST(LatencyTest, RejectsNegativeOrNanLoad) {
  const auto c = TableCoeffs();
  EXPECT_THROW(AttentionLatency(c, -1), std::invalid_argument);
  EXPECT_THROW(FfnLatency(c, -0.5), std::invalid_argument);
  EXPECT_THROW(CommLatency(c, -2), std::invalid_argument);
  EXPECT_THROW(AttentionLatency(c, std::nan("")), std::invalid_argument);
}

// Integer-valued coefficients and loads keep every sum exact in binary
// floating point, so the affine identity can be checked with ==.
TEST(LatencyTest, AffineAndMonotoneOnExactGrid) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(1, 1000);
  std::uniform_int_distribution<int> load(0, 1 << 20);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = LatencyCoefficients::Create(coef(rng), coef(rng), coef(rng),
                                               coef(rng), coef(rng), coef(rng));
    const double a = load(rng);
    const double b = load(rng);
    EXPECT_EQ(AttentionLatency(c, a) + AttentionLatency(c, b) -
                  AttentionLatency(c, 0),
              AttentionLatency(c, a + b));
    EXPECT_EQ(FfnLatency(c, a) + FfnLatency(c, b) - FfnLatency(c, 0),
              FfnLatency(c, a + b));
    EXPECT_EQ(CommLatency(c, a) + CommLatency(c, b) - CommLatency(c, 0),
              CommLatency(c, a + b));
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    EXPECT_LE(AttentionLatency(c, lo), AttentionLatency(c, hi));
    EXPECT_LE(FfnLatency(c, lo), FfnLatency(c, hi));
    EXPECT_LE(CommLatency(c, lo), CommLatency(c, hi));
  }
}

TEST(LatencyTest, AffineWithinRoundingForTableCoefficients) {
  const auto c = TableCoeffs();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> load(0.0, 2e5);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = load(rng);
    const double b = load(rng);
    const double lhs =
        AttentionLatency(c, a) + AttentionLatency(c, b) - AttentionLatency(c, 0);
    EXPECT_NEAR(lhs, AttentionLatency(c, a + b), 1e-9 * lhs);
  }
}

TEST(LatencyTest, CommSplitSumsToRoundTrip) {
  const auto c = TableCoeffs();
  for (int B : {1, 7, 128, 256, 512}) {
    const double half = CommLatency(c, B) / 2.0;
    EXPECT_EQ(half + half, CommLatency(c, B));
  }
}

TEST(WorkloadSpecTest, MuDConversionAndValidation) {
  WorkloadSpec spec;
  EXPECT_NEAR(spec.mu_D(), 500.0, 1e-9);
  EXPECT_DOUBLE_EQ(WorkloadSpec::PFromMuD(100), 1.0 / 101.0);
  spec.Validate();
  spec.p = 1.0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
  spec.p = 0.5;
  spec.mu_P = 0.0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
  spec.mu_P = 1.0;
  spec.N = 0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
}

TEST(BundleConfigTest, Validation) {
  BundleConfig{1, 1}.Validate();
  EXPECT_THROW((BundleConfig{0, 1}.Validate()), std::invalid_argument);
  EXPECT_THROW((BundleConfig{1, 0}.Validate()), std::invalid_argument);
}

TEST(PrefillDistTest, RoundTrip) {
  for (auto d : {PrefillDist::kConstant, PrefillDist::kUniformBounded}) {
    EXPECT_EQ(ParsePrefillDist(ToString(d)), d);
  }
  EXPECT_THROW(ParsePrefillDist("normal"), std::invalid_argument);
}

}  // namespace
}  // namespace afd
