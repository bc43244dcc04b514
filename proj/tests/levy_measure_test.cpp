#include "levydpp/levy_measure.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace levydpp {
namespace {

LevyMeasureSpec power_law_spec() {
  LevyMeasureSpec spec;
  spec.small_part = PowerLawPart{1.0, 0.5};
  spec.large_part = PowerLawPart{1.0, 0.5};
  spec.small_cutoff = 1.0;
  return spec;
}

TEST(LevyMeasureTest, PowerLawTailMassClosedForm) {
  // Mass of |eta| >= M under density |eta|^{-1.5} per side: 2 M^{-1/2} / 0.5.
  EXPECT_NEAR(tail_mass(power_law_spec(), 1.0), 4.0, 1e-12);
  EXPECT_NEAR(tail_mass(power_law_spec(), 4.0), 2.0, 1e-12);
  EXPECT_NEAR(tail_mass(power_law_spec(), 16.0), 1.0, 1e-12);
}

TEST(LevyMeasureTest, TailMassBelowCutoffThrows) {
  EXPECT_THROW(tail_mass(power_law_spec(), 0.5), std::invalid_argument);
}

TEST(LevyMeasureTest, PowerLawBandMassClosedForm) {
  // Band [0.25, 1): 2 (0.25^{-1/2} - 1^{-1/2}) / 0.5 = 4.
  EXPECT_NEAR(band_mass(PowerLawPart{1.0, 0.5}, 0.25, 1.0), 4.0, 1e-12);
  EXPECT_NEAR(band_mass(PowerLawPart{1.0, 0.5}, 0.0625, 0.25), 8.0, 1e-12);
}

TEST(LevyMeasureTest, SubCutoffVarianceClosedForm) {
  // Integral of eta^2 |eta|^{-1.5} over [-1,1] minus origin: 2 / 1.5.
  EXPECT_NEAR(sub_cutoff_variance(power_law_spec()), 4.0 / 3.0, 1e-12);
}

TEST(LevyMeasureTest, PointMassesTailAndRate) {
  LevyMeasureSpec spec;
  spec.large_part = PointMassesPart{{PointMass{{2.0}, 1.0}}};
  EXPECT_DOUBLE_EQ(tail_mass(spec, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(tail_mass(spec, 1.5), 1.0);
  EXPECT_DOUBLE_EQ(total_large_rate(spec), 1.0);
}

TEST(LevyMeasureTest, NoLargePartMeansZeroRate) {
  LevyMeasureSpec spec;
  EXPECT_DOUBLE_EQ(total_large_rate(spec), 0.0);
  EXPECT_DOUBLE_EQ(tail_mass(spec, 2.0), 0.0);
}

TEST(LevyMeasureTest, CompensatorBandIntegralOracle) {
  // gamma(eta) = |eta| against the band [0.25, 1) of the power-law density,
  // mirrored: 2 * integral eta^{-1/2} over [0.25,1) = 2 (2 sqrt(1) - 2 sqrt(0.25)).
  LevyMeasureSpec spec = power_law_spec();
  spec.small_cutoff = 0.25;
  const CompensatorRule rule = small_jump_compensator(spec, 64);
  ASSERT_FALSE(rule.marks.empty());
  double total = 0;
  for (std::size_t i = 0; i < rule.marks.size(); ++i)
    total += rule.weights[i] * std::abs(rule.marks[i][0]);
  EXPECT_NEAR(total, 2.0, 1e-9);
  // Total weight equals the band rate.
  double mass = 0;
  for (double w : rule.weights) mass += w;
  EXPECT_NEAR(mass, band_rate(spec), 1e-9);
}

TEST(LevyMeasureTest, CompensatorOddIntegrandVanishes) {
  // The mirrored rule makes any odd integrand integrate to exactly zero.
  LevyMeasureSpec spec = power_law_spec();
  spec.small_cutoff = 0.25;
  const CompensatorRule rule = small_jump_compensator(spec, 64);
  ASSERT_FALSE(rule.marks.empty());
  double total = 0;
  for (std::size_t i = 0; i < rule.marks.size(); ++i)
    total += rule.weights[i] * rule.marks[i][0];
  EXPECT_DOUBLE_EQ(total, 0.0);
}

TEST(LevyMeasureTest, CompensatorEmptyWhenBandEmpty) {
  EXPECT_TRUE(small_jump_compensator(power_law_spec(), 64).marks.empty());
  LevyMeasureSpec none;
  EXPECT_TRUE(small_jump_compensator(none, 64).marks.empty());
}

TEST(LevyMeasureTest, ValidationAggregatesFaults) {
  LevyMeasureSpec spec;
  spec.jump_dim = 0;
  spec.small_cutoff = -1.0;
  try {
    validate(spec);
    FAIL() << "expected validation failure";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("jump_dim"), std::string::npos);
    EXPECT_NE(msg.find("small_cutoff"), std::string::npos);
  }
}

TEST(LevyMeasureTest, LognormalShiftedTailMass) {
  // Radius 1 + exp(mu + sigma Z) always exceeds 1, so the full rate sits
  // above M = 1.
  LevyMeasureSpec spec;
  spec.large_part = LognormalShiftedPart{2.0, 0.0, 0.5};
  EXPECT_NEAR(tail_mass(spec, 1.0), 2.0, 1e-12);
  // P(1 + exp(0.5 Z) >= 2) = P(Z >= 0) = 1/2, scaled by rate 2.
  EXPECT_NEAR(tail_mass(spec, 2.0), 1.0, 1e-9);
}

}  // namespace
}  // namespace levydpp
