#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "levydpp/levy_measure.hpp"
#include "levydpp/noise.hpp"

namespace levydpp {
namespace {

LevyMeasureSpec band_and_tail_spec() {
  LevyMeasureSpec spec;
  spec.jump_dim = 1;
  spec.small_part = PowerLawPart{1.0, 0.5};
  spec.large_part = PowerLawPart{1.0, 0.5};
  spec.small_cutoff = 0.25;
  return spec;
}

std::vector<double> uniform_grid(double s, double T, int n) {
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = s + (T - s) * i / n;
  g.back() = T;
  return g;
}

TEST(TruncationLevelTest, RejectsLevelsBelowOne) {
  EXPECT_THROW(TruncationLevel(0.5), std::invalid_argument);
  EXPECT_THROW(TruncationLevel(0.0), std::invalid_argument);
  EXPECT_NO_THROW(TruncationLevel(1.0));
  EXPECT_NO_THROW(TruncationLevel(16.0));
}

TEST(SampleNoiseTest, SameSeedReproducesRealization) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 1.0, 16);
  const auto a = sample_noise(spec, 2, 0.0, 1.0, grid, 42);
  const auto b = sample_noise(spec, 2, 0.0, 1.0, grid, 42);
  ASSERT_EQ(a.time_grid, b.time_grid);
  ASSERT_EQ(a.brownian_increments, b.brownian_increments);
  ASSERT_EQ(a.jump_events.size(), b.jump_events.size());
  for (std::size_t i = 0; i < a.jump_events.size(); ++i) {
    EXPECT_EQ(a.jump_events[i].time, b.jump_events[i].time);
    EXPECT_EQ(a.jump_events[i].mark, b.jump_events[i].mark);
  }
  const auto c = sample_noise(spec, 2, 0.0, 1.0, grid, 43);
  EXPECT_NE(a.brownian_increments, c.brownian_increments);
}

TEST(SampleNoiseTest, EventTimesStrictlyIncreasingWithinWindow) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.5, 2.0, 10);
  const auto noise = sample_noise(spec, 0, 0.5, 2.0, grid, 7);
  ASSERT_FALSE(noise.jump_events.empty());
  double prev = 0.5;
  for (const auto& ev : noise.jump_events) {
    EXPECT_GT(ev.time, prev);
    EXPECT_LE(ev.time, 2.0);
    prev = ev.time;
  }
}

TEST(SampleNoiseTest, EventTimesAreGridPoints) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto noise = sample_noise(spec, 1, 0.0, 1.0, grid, 11);
  for (double g : grid)
    EXPECT_TRUE(std::binary_search(noise.time_grid.begin(), noise.time_grid.end(), g));
  ASSERT_EQ(noise.jump_grid_index.size(), noise.jump_events.size());
  for (std::size_t i = 0; i < noise.jump_events.size(); ++i)
    EXPECT_EQ(noise.time_grid[noise.jump_grid_index[i]], noise.jump_events[i].time);
  EXPECT_TRUE(std::is_sorted(noise.time_grid.begin(), noise.time_grid.end()));
  EXPECT_EQ(std::adjacent_find(noise.time_grid.begin(), noise.time_grid.end()),
            noise.time_grid.end());
}

TEST(SampleNoiseTest, BrownianLayoutMatchesIntervals) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto noise = sample_noise(spec, 3, 0.0, 1.0, grid, 19);
  EXPECT_EQ(noise.brownian_increments.size(), noise.intervals() * 3);
  const auto none = sample_noise(spec, 0, 0.0, 1.0, grid, 19);
  EXPECT_TRUE(none.brownian_increments.empty());
}

TEST(SampleNoiseTest, BandMarksStayBelowCutoffAndLargeMarksAbove) {
  LevyMeasureSpec spec = band_and_tail_spec();
  spec.small_cutoff = 0.25;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto noise = sample_noise(spec, 0, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), seed);
    for (const auto& ev : noise.jump_events) {
      const double r = sup_norm(ev.mark);
      if (r < 1.0)
        EXPECT_GE(r, 0.25);
      else
        EXPECT_GE(r, 1.0);
    }
  }
  LevyMeasureSpec band_only = spec;
  band_only.large_part = NoPart{};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto noise = sample_noise(band_only, 0, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), seed);
    for (const auto& ev : noise.jump_events) {
      EXPECT_GE(sup_norm(ev.mark), 0.25);
      EXPECT_LT(sup_norm(ev.mark), 1.0);
    }
  }
}

TEST(SampleNoiseTest, LargeEventCountMatchesTailMass) {
  LevyMeasureSpec spec;
  spec.small_part = NoPart{};
  spec.large_part = PowerLawPart{1.0, 0.5};
  const double rate = tail_mass(spec, 1.0);
  ASSERT_NEAR(rate, 4.0, 1e-12);
  const int n = 4000;
  double total = 0;
  for (int seed = 0; seed < n; ++seed) {
    const auto noise =
        sample_noise(spec, 0, 0.0, 1.0, uniform_grid(0.0, 1.0, 2), 900 + seed);
    total += static_cast<double>(noise.jump_events.size());
  }
  const double mean = total / n;
  const double se = std::sqrt(rate / n);
  EXPECT_NEAR(mean, rate, 4 * se);
}

TEST(SampleNoiseTest, PointMassMarksComeFromAtomList) {
  LevyMeasureSpec spec;
  spec.small_part = NoPart{};
  spec.large_part = PointMassesPart{{PointMass{{2.0}, 1.0}, PointMass{{-3.0}, 0.5}}};
  int seen_two = 0, seen_three = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto noise = sample_noise(spec, 0, 0.0, 2.0, uniform_grid(0.0, 2.0, 2), seed);
    for (const auto& ev : noise.jump_events) {
      ASSERT_EQ(ev.mark.size(), 1u);
      if (ev.mark[0] == 2.0)
        ++seen_two;
      else if (ev.mark[0] == -3.0)
        ++seen_three;
      else
        FAIL() << "unexpected mark " << ev.mark[0];
    }
  }
  EXPECT_GT(seen_two, 0);
  EXPECT_GT(seen_three, 0);
}

TEST(SampleNoiseTest, RefinementIncrementsOnlyWhenRequested) {
  LevyMeasureSpec spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto plain = sample_noise(spec, 1, 0.0, 1.0, grid, 3);
  EXPECT_TRUE(plain.refinement_increments.empty());
  EXPECT_EQ(plain.refinement_delta, 0.0);
  spec.gaussian_refinement = true;
  const auto refined = sample_noise(spec, 1, 0.0, 1.0, grid, 3);
  EXPECT_EQ(refined.refinement_increments.size(), refined.intervals());
  EXPECT_EQ(refined.refinement_delta, spec.small_cutoff / 2.0);
}

TEST(SampleNoiseTest, RejectsBadGrids) {
  const auto spec = band_and_tail_spec();
  EXPECT_THROW(sample_noise(spec, 0, 0.0, 1.0, {}, 1), std::invalid_argument);
  EXPECT_THROW(sample_noise(spec, 0, 0.0, 1.0, {0.0, 0.5}, 1), std::invalid_argument);
  EXPECT_THROW(sample_noise(spec, 0, 0.0, 1.0, {0.0, 0.5, 0.5, 1.0}, 1),
               std::invalid_argument);
  EXPECT_THROW(sample_noise(spec, -1, 0.0, 1.0, {0.0, 1.0}, 1), std::invalid_argument);
  EXPECT_THROW(sample_noise(spec, 0, 1.0, 1.0, {1.0}, 1), std::invalid_argument);
}

TEST(FirstExceedTest, MatchesManualScan) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 4.0, 16);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto noise = sample_noise(spec, 0, 0.0, 4.0, grid, seed);
    for (double M : {1.0, 2.0, 8.0}) {
      double expected = kNoExceedance;
      for (const auto& ev : noise.jump_events)
        if (norm2(ev.mark) >= M) {
          expected = ev.time;
          break;
        }
      EXPECT_EQ(first_exceed_time(noise, TruncationLevel(M)), expected);
    }
  }
}

TEST(FirstExceedTest, NoEventsMeansNoExceedance) {
  LevyMeasureSpec spec;
  spec.small_part = NoPart{};
  spec.large_part = NoPart{};
  const auto noise = sample_noise(spec, 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), 5);
  EXPECT_TRUE(noise.jump_events.empty());
  EXPECT_EQ(first_exceed_time(noise, TruncationLevel(1.0)), kNoExceedance);
}

TEST(RestrictNoiseTest, SuffixViewPreservesData) {
  const auto spec = band_and_tail_spec();
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto noise = sample_noise(spec, 2, 0.0, 1.0, grid, 21);
  const double t1 = 0.5;
  const auto sub = restrict_noise(noise, t1);
  EXPECT_EQ(sub.s, t1);
  EXPECT_EQ(sub.T, noise.T);

  const auto it = std::lower_bound(noise.time_grid.begin(), noise.time_grid.end(), t1);
  ASSERT_NE(it, noise.time_grid.end());
  const std::size_t k = static_cast<std::size_t>(it - noise.time_grid.begin());
  ASSERT_EQ(sub.time_grid.size(), noise.time_grid.size() - k);
  for (std::size_t i = 0; i < sub.time_grid.size(); ++i)
    EXPECT_EQ(sub.time_grid[i], noise.time_grid[k + i]);
  ASSERT_EQ(sub.brownian_increments.size(), noise.brownian_increments.size() - 2 * k);
  for (std::size_t i = 0; i < sub.brownian_increments.size(); ++i)
    EXPECT_EQ(sub.brownian_increments[i], noise.brownian_increments[2 * k + i]);

  std::size_t kept = 0;
  for (const auto& ev : noise.jump_events)
    if (ev.time > t1) ++kept;
  ASSERT_EQ(sub.jump_events.size(), kept);
  for (std::size_t i = 0; i < sub.jump_events.size(); ++i) {
    EXPECT_GT(sub.jump_events[i].time, t1);
    EXPECT_EQ(sub.time_grid[sub.jump_grid_index[i]], sub.jump_events[i].time);
  }
}

TEST(RestrictNoiseTest, RejectsNonGridPoint) {
  const auto spec = band_and_tail_spec();
  const auto noise = sample_noise(spec, 0, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), 2);
  EXPECT_THROW(restrict_noise(noise, 0.123456789), std::invalid_argument);
}

}  // namespace
}  // namespace levydpp
