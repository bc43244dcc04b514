#include <gtest/gtest.h>

#include <cmath>

#include "levydpp/dynamics.hpp"
#include "levydpp/problems.hpp"

namespace levydpp {
namespace {

CoefficientSet scalar_coeffs(DriftFn b, DiffusionFn sigma, JumpFn gamma) {
  CoefficientSet c;
  c.state_dim = 1;
  c.brownian_dim = 1;
  c.action_dim = 1;
  c.b = std::move(b);
  c.sigma = std::move(sigma);
  c.gamma = std::move(gamma);
  return c;
}

void zero_fn(double, std::span<const double>, std::span<const double>, std::span<double> out) {
  out[0] = 0.0;
}

void zero_jump(double, std::span<const double>, std::span<const double>,
               std::span<const double>, std::span<double> out) {
  out[0] = 0.0;
}

std::vector<double> uniform_grid(double s, double T, int n) {
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = s + (T - s) * i / n;
  g.back() = T;
  return g;
}

LevyMeasureSpec quiet_spec() { return LevyMeasureSpec{}; }

TEST(IntegrateTest, ZeroCoefficientsKeepStateConstant) {
  const auto c = scalar_coeffs(zero_fn, zero_fn, zero_jump);
  const auto noise = sample_noise(quiet_spec(), 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 16), 1);
  const auto path = integrate(c, ControlPolicy::constant({0.0}), noise, 0.0, {1.5}, 1.0);
  ASSERT_EQ(path.points(), noise.time_grid.size());
  for (std::size_t k = 0; k < path.points(); ++k) {
    EXPECT_EQ(path.values[k], 1.5);
    EXPECT_EQ(path.left_limits[k], 1.5);
  }
  EXPECT_FALSE(path.diverged);
  EXPECT_EQ(path.interval_actions.size(), path.points() - 1);
}

TEST(IntegrateTest, PureDriftFollowsAction) {
  const auto c = scalar_coeffs(
      [](double, std::span<const double>, std::span<const double> u, std::span<double> out) {
        out[0] = u[0];
      },
      zero_fn, zero_jump);
  const auto noise = sample_noise(quiet_spec(), 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 64), 3);
  const auto policy = ControlPolicy::piecewise({0.5}, {Vec{1.0}, Vec{-2.0}});
  const auto path = integrate(c, policy, noise, 0.0, {0.0}, 1.0);
  // Euler with exact linear drift: x(0.5) = 0.5, x(1) = 0.5 - 2 * 0.5 = -0.5.
  const auto at = [&](double t) {
    for (std::size_t k = 0; k < path.points(); ++k)
      if (path.time_grid[k] == t) return path.values[k];
    throw std::logic_error("time not on grid");
  };
  EXPECT_NEAR(at(0.5), 0.5, 1e-12);
  EXPECT_NEAR(at(1.0), -0.5, 1e-12);
  // The action in force on (0.5, 0.5 + dt] already comes from the second piece.
  for (std::size_t k = 0; k + 1 < path.points(); ++k) {
    const double expect = path.time_grid[k] < 0.5 ? 1.0 : -2.0;
    EXPECT_EQ(path.interval_actions[k][0], expect);
  }
}

TEST(IntegrateTest, UnitDiffusionReproducesBrownianSums) {
  const auto c = scalar_coeffs(
      zero_fn,
      [](double, std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
      },
      zero_jump);
  const auto noise = sample_noise(quiet_spec(), 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 32), 9);
  const auto path = integrate(c, ControlPolicy::constant({0.0}), noise, 0.0, {0.0}, 1.0);
  double w = 0.0;
  EXPECT_EQ(path.values[0], 0.0);
  for (std::size_t k = 0; k + 1 < path.points(); ++k) {
    w = w + noise.brownian_increments[k];
    EXPECT_EQ(path.values[k + 1], w);
  }
}

TEST(IntegrateTest, JumpsApplyGammaAtEventPoints) {
  LevyMeasureSpec spec;
  spec.large_part = PointMassesPart{{PointMass{{2.0}, 3.0}}};
  const auto c = scalar_coeffs(zero_fn, zero_fn,
                               [](double, std::span<const double>, std::span<const double>,
                                  std::span<const double> eta, std::span<double> out) {
                                 out[0] = eta[0];
                               });
  const auto noise = sample_noise(spec, 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 8), 17);
  ASSERT_FALSE(noise.jump_events.empty());
  const auto path = integrate(c, ControlPolicy::constant({0.0}), noise, 0.0, {0.0}, 1.0);
  ASSERT_EQ(path.jumps.size(), noise.jump_events.size());
  for (const auto& rec : path.jumps) {
    EXPECT_TRUE(rec.applied);
    EXPECT_EQ(path.values[rec.grid_index], path.left_limits[rec.grid_index] + 2.0);
  }
  EXPECT_EQ(path.final_state()[0], 2.0 * static_cast<double>(noise.jump_events.size()));
}

TEST(IntegrateTest, TruncationSkipsLargeJumpsOnly) {
  LevyMeasureSpec spec;
  spec.large_part = PointMassesPart{{PointMass{{2.0}, 2.0}, PointMass{{1.2}, 2.0}}};
  const auto c = scalar_coeffs(zero_fn, zero_fn,
                               [](double, std::span<const double>, std::span<const double>,
                                  std::span<const double> eta, std::span<double> out) {
                                 out[0] = eta[0];
                               });
  const auto noise = sample_noise(spec, 1, 0.0, 2.0, uniform_grid(0.0, 2.0, 8), 23);
  ASSERT_FALSE(noise.jump_events.empty());
  const auto path = integrate_truncated(c, ControlPolicy::constant({0.0}), noise, 0.0, {0.0},
                                        2.0, TruncationLevel(1.5));
  double expect = 0.0;
  for (const auto& rec : path.jumps) {
    const bool should_apply = std::abs(rec.mark[0]) < 1.5;
    EXPECT_EQ(rec.applied, should_apply);
    if (should_apply) expect += rec.mark[0];
  }
  EXPECT_EQ(path.final_state()[0], expect);
}

TEST(IntegrateTest, CouplingIsBitExactWhenNoJumpExceeds) {
  const auto prob = make_problem("linear-drift");
  const auto grid = make_grid(prob.s, prob.T, prob.dt, {});
  const auto noise =
      sample_noise(prob.spec, prob.coeffs.brownian_dim, prob.s, prob.T, grid, 31);
  const double biggest = [&] {
    double r = 0;
    for (const auto& ev : noise.jump_events) r = std::max(r, norm2(ev.mark));
    return r;
  }();
  const auto policy = prob.full_family().front();
  const auto full = integrate(prob.coeffs, policy, noise, prob.s, prob.x0, prob.T);
  const auto trunc = integrate_truncated(prob.coeffs, policy, noise, prob.s, prob.x0, prob.T,
                                         TruncationLevel(std::max(1.0, biggest + 1.0)));
  EXPECT_EQ(full.values, trunc.values);
  EXPECT_EQ(full.left_limits, trunc.left_limits);
  EXPECT_EQ(full.time_grid, trunc.time_grid);
}

TEST(IntegrateTest, DivergenceGuardFreezesPath) {
  const auto c = scalar_coeffs(
      [](double, std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = 100.0 * x[0];
      },
      zero_fn, zero_jump);
  const auto noise = sample_noise(quiet_spec(), 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 32), 5);
  const auto path = integrate(c, ControlPolicy::constant({0.0}), noise, 0.0, {1.0}, 1.0, 100.0);
  EXPECT_TRUE(path.diverged);
  // Values freeze at the triggering state and stay finite.
  const double frozen = path.final_state()[0];
  EXPECT_TRUE(std::isfinite(frozen));
  EXPECT_GT(std::abs(frozen), 100.0);
  std::size_t first_hit = 0;
  while (std::abs(path.values[first_hit]) <= 100.0) ++first_hit;
  for (std::size_t k = first_hit; k < path.points(); ++k)
    EXPECT_EQ(path.values[k], path.values[first_hit]);
}

TEST(IntegrateTest, RejectsMismatchedInputs) {
  const auto c = scalar_coeffs(zero_fn, zero_fn, zero_jump);
  const auto noise = sample_noise(quiet_spec(), 1, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), 1);
  EXPECT_THROW(integrate(c, ControlPolicy::constant({0.0}), noise, 0.0, {1.0, 2.0}, 1.0),
               std::invalid_argument);
  EXPECT_THROW(integrate(c, ControlPolicy::constant({0.0}), noise, 0.25, {1.0}, 1.0),
               std::invalid_argument);
  const auto noise2 = sample_noise(quiet_spec(), 2, 0.0, 1.0, uniform_grid(0.0, 1.0, 4), 1);
  EXPECT_THROW(integrate(c, ControlPolicy::constant({0.0}), noise2, 0.0, {1.0}, 1.0),
               std::invalid_argument);
}

TEST(Assumption1Test, RegistryProblemsSatisfyDeclaredConstants) {
  for (const auto& name : registry_names()) {
    const auto prob = make_problem(name);
    const auto report = verify_assumption1(prob.coeffs, 2000, 8.0, prob.M_list);
    EXPECT_TRUE(report.pass) << name << ": " << (report.violations.empty()
                                                     ? std::string("no detail")
                                                     : report.violations.front());
  }
}

TEST(Assumption1Test, DetectsSuperlinearDrift) {
  auto c = scalar_coeffs(
      [](double, std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = x[0] * x[0];
      },
      zero_fn, zero_jump);
  c.lip_C = 1.0;
  c.lip_CM = [](double) { return 1.0; };
  const auto report = verify_assumption1(c, 2000, 8.0, {1.0});
  EXPECT_FALSE(report.pass);
  EXPECT_FALSE(report.violations.empty());
}

}  // namespace
}  // namespace levydpp
