#pragma once

// Revenue functionals and value functions by Monte Carlo over finite policy
// families, with common random numbers across policies and truncation levels,
// plus the oscillation modulus and the partition utilities the conditional
// checks rely on.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "levydpp/common.hpp"
#include "levydpp/control.hpp"
#include "levydpp/dynamics.hpp"
#include "levydpp/noise.hpp"
#include "levydpp/rng.hpp"
#include "levydpp/stats.hpp"

namespace levydpp {

struct CostSpec {
  std::function<double(double t, std::span<const double> x, std::span<const double> u)> f;
  std::function<double(std::span<const double> x)> h;
  double f_bound = 0;
  double h_bound = 0;
  std::optional<double> f_lip;
  std::optional<double> h_lip;
};

struct ValueEstimate {
  double mean = 0;
  double std_error = 0;
  std::size_t n_paths = 0;
  std::optional<double> M;
  std::size_t diverged_count = 0;
};

// Running-cost integral by trapezoid on the jump-adapted grid (left limits
// at right endpoints, so jumps never leak into the integrand early) plus the
// terminal cost. NaN for a diverged path.
inline double path_revenue(const StatePath& path, const CostSpec& cost) {
  if (path.diverged) return std::numeric_limits<double>::quiet_NaN();
  double integral = 0;
  for (std::size_t k = 0; k + 1 < path.points(); ++k) {
    const double dt = path.time_grid[k + 1] - path.time_grid[k];
    const Vec& u = path.interval_actions[k];
    integral += 0.5 * dt *
                (cost.f(path.time_grid[k], path.state_at(k), u) +
                 cost.f(path.time_grid[k + 1], path.left_at(k + 1), u));
  }
  return integral + cost.h(path.final_state());
}

struct RevenueSamples {
  std::vector<double> samples;  // per path seed; NaN where the path diverged
  std::size_t diverged = 0;
};

namespace detail {

inline ValueEstimate summarize(const std::vector<double>& samples, std::optional<double> M) {
  std::vector<double> finite;
  finite.reserve(samples.size());
  for (double v : samples)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) throw EstimationError("revenue: all paths diverged");
  const MeanSe ms = mean_se(finite);
  ValueEstimate est;
  est.mean = ms.mean;
  est.std_error = ms.std_error;
  est.n_paths = finite.size();
  est.M = M;
  est.diverged_count = samples.size() - finite.size();
  return est;
}

}  // namespace detail

// Coupled revenue samples for a whole family on shared noise: one noise
// realization per path seed, integrated once per policy. The grid carries
// every policy's deterministic breakpoints so switches land on grid points.
inline std::vector<RevenueSamples> family_revenue_samples(
    const std::vector<ControlPolicy>& family, const CoefficientSet& coeffs,
    const CostSpec& cost, const LevyMeasureSpec& spec, double s, const Vec& x, double T,
    std::size_t n_paths, std::uint64_t seed, std::optional<TruncationLevel> M,
    double dt = 0, int workers = 1, double guard = kDefaultDivergenceGuard) {
  if (family.empty()) throw std::invalid_argument("revenue: empty policy family");
  if (n_paths < 1) throw std::invalid_argument("revenue: need n_paths >= 1");
  if (dt <= 0) dt = (T - s) / 256.0;
  std::vector<double> extra;
  for (const auto& p : family) collect_breakpoints(p, extra);
  const std::vector<double> grid = make_grid(s, T, dt, extra);

  std::vector<RevenueSamples> out(family.size());
  for (auto& r : out) r.samples.assign(n_paths, 0.0);
  std::vector<std::vector<unsigned char>> diverged(family.size());
  for (auto& dcol : diverged) dcol.assign(n_paths, 0);

  parallel_for(n_paths, workers, [&](std::size_t k) {
    const NoiseRealization noise =
        sample_noise(spec, coeffs.brownian_dim, s, T, grid, derive_seed(seed, k));
    for (std::size_t p = 0; p < family.size(); ++p) {
      const StatePath path =
          M ? integrate_truncated(coeffs, family[p], noise, s, x, T, *M, guard)
            : integrate(coeffs, family[p], noise, s, x, T, guard);
      out[p].samples[k] = path_revenue(path, cost);
      diverged[p][k] = path.diverged ? 1 : 0;
    }
  });
  for (std::size_t p = 0; p < family.size(); ++p)
    for (std::size_t k = 0; k < n_paths; ++k) out[p].diverged += diverged[p][k];
  return out;
}

inline RevenueSamples revenue_samples(const ControlPolicy& policy, const CoefficientSet& coeffs,
                                      const CostSpec& cost, const LevyMeasureSpec& spec,
                                      double s, const Vec& x, double T, std::size_t n_paths,
                                      std::uint64_t seed, std::optional<TruncationLevel> M,
                                      double dt = 0, int workers = 1,
                                      double guard = kDefaultDivergenceGuard) {
  return family_revenue_samples({policy}, coeffs, cost, spec, s, x, T, n_paths, seed, M, dt,
                                workers, guard)
      .front();
}

inline ValueEstimate revenue(const ControlPolicy& policy, const CoefficientSet& coeffs,
                             const CostSpec& cost, const LevyMeasureSpec& spec, double s,
                             const Vec& x, double T, std::size_t n_paths, std::uint64_t seed,
                             std::optional<TruncationLevel> M = std::nullopt, double dt = 0,
                             int workers = 1, double guard = kDefaultDivergenceGuard) {
  if (n_paths < 2) throw std::invalid_argument("revenue: need n_paths >= 2");
  const RevenueSamples rs = revenue_samples(policy, coeffs, cost, spec, s, x, T, n_paths,
                                            seed, M, dt, workers, guard);
  return detail::summarize(rs.samples, M ? std::optional<double>(M->M) : std::nullopt);
}

struct ValueResult {
  ValueEstimate best;
  std::size_t argmax = 0;
  std::vector<ValueEstimate> per_policy;
  std::vector<double> per_seed_max;  // family max per path seed; NaN if every policy diverged
};

// Family value sup by common random numbers; argmax ties break to the first
// policy index.
inline ValueResult value(const std::vector<ControlPolicy>& family, const CoefficientSet& coeffs,
                         const CostSpec& cost, const LevyMeasureSpec& spec, double s,
                         const Vec& x, double T, std::size_t n_paths, std::uint64_t seed,
                         std::optional<TruncationLevel> M = std::nullopt, double dt = 0,
                         int workers = 1, double guard = kDefaultDivergenceGuard) {
  const auto samples = family_revenue_samples(family, coeffs, cost, spec, s, x, T, n_paths,
                                              seed, M, dt, workers, guard);
  ValueResult result;
  const std::optional<double> Mval = M ? std::optional<double>(M->M) : std::nullopt;
  for (const auto& rs : samples) result.per_policy.push_back(detail::summarize(rs.samples, Mval));
  result.argmax = 0;
  for (std::size_t p = 1; p < result.per_policy.size(); ++p)
    if (result.per_policy[p].mean > result.per_policy[result.argmax].mean) result.argmax = p;
  result.best = result.per_policy[result.argmax];
  result.per_seed_max.assign(n_paths, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n_paths; ++k) {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& rs : samples) {
      const double v = rs.samples[k];
      if (std::isfinite(v) && (std::isnan(best) || v > best)) best = v;
    }
    result.per_seed_max[k] = best;
  }
  return result;
}

// Sampled lower bound on the joint oscillation of f and h over pairs within
// distance alpha inside the beta-ball.
inline double modulus(const CostSpec& cost, const ActionSet& actions, double T, int state_dim,
                      double alpha, double beta, int sample_count, std::uint64_t seed = 7) {
  if (!(alpha > 0) || !(beta > 0)) throw std::invalid_argument("modulus: need alpha, beta > 0");
  if (sample_count < 1) throw std::invalid_argument("modulus: need samples");
  Rng rng(seed);
  Vec x(state_dim), xh(state_dim);
  double best = 0;
  for (int i = 0; i < sample_count; ++i) {
    const double t = rng.uniform() * T;
    const Vec& u = actions.actions[rng.next_u64() % actions.actions.size()];
    // x uniform in the beta-ball, xh = projection of x + (alpha-ball point)
    // back onto the ball; projection only shrinks |x - xh|.
    double r = beta * std::pow(rng.uniform(), 1.0 / state_dim);
    for (auto& c : x) c = rng.normal();
    double n = norm2(x);
    if (n < 1e-12) n = 1;
    for (auto& c : x) c *= r / n;
    r = alpha * std::pow(rng.uniform(), 1.0 / state_dim);
    for (auto& c : xh) c = rng.normal();
    n = norm2(xh);
    if (n < 1e-12) n = 1;
    for (std::size_t j = 0; j < xh.size(); ++j) xh[j] = x[j] + xh[j] * r / n;
    const double nh = norm2(xh);
    if (nh > beta)
      for (auto& c : xh) c *= beta / nh;
    const double osc =
        std::abs(cost.f(t, x, u) - cost.f(t, xh, u)) + std::abs(cost.h(x) - cost.h(xh));
    best = std::max(best, osc);
  }
  return best;
}

struct PartitionBox {
  Vec lower;
  Vec upper;
};

struct Partition {
  double alpha = 0;
  double beta = 0;
  double side = 0;
  int dim = 1;
  std::vector<int> cells_per_axis;
  std::vector<PartitionBox> boxes;
};

// Axis-aligned half-open boxes of side alpha * epsilon^(1/p) / sqrt(d)
// covering [-beta, beta]^d, so each box's diameter is at most
// alpha * epsilon^(1/p).
inline Partition make_partition(double beta, double alpha, double p, double epsilon,
                                int state_dim, std::size_t cap = 1u << 16) {
  if (!(alpha > 0) || !(beta > 0) || !(epsilon > 0) || !(p > 0))
    throw std::invalid_argument("make_partition: parameters must be positive");
  Partition part;
  part.alpha = alpha;
  part.beta = beta;
  part.dim = state_dim;
  part.side = alpha * std::pow(epsilon, 1.0 / p) / std::sqrt(static_cast<double>(state_dim));
  const int per_axis = static_cast<int>(std::ceil(2.0 * beta / part.side - 1e-12));
  const double total = std::pow(static_cast<double>(per_axis), state_dim);
  if (total > static_cast<double>(cap))
    throw BudgetError("make_partition: " + std::to_string(total) + " cells exceed cap " +
                      std::to_string(cap));
  part.cells_per_axis.assign(state_dim, per_axis);
  std::vector<int> idx(state_dim, 0);
  for (;;) {
    PartitionBox box;
    box.lower.resize(state_dim);
    box.upper.resize(state_dim);
    for (int j = 0; j < state_dim; ++j) {
      box.lower[j] = -beta + idx[j] * part.side;
      box.upper[j] = -beta + (idx[j] + 1) * part.side;
    }
    part.boxes.push_back(std::move(box));
    int j = 0;
    for (; j < state_dim; ++j) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
    if (j == state_dim) break;
  }
  return part;
}

// Index of the half-open box containing x, or none when x falls outside the
// covered region.
inline std::optional<std::size_t> locate(const Partition& part, std::span<const double> x) {
  std::size_t index = 0, stride = 1;
  for (int j = 0; j < part.dim; ++j) {
    const int c = static_cast<int>(std::floor((x[j] + part.beta) / part.side));
    if (c < 0 || c >= part.cells_per_axis[j]) return std::nullopt;
    index += stride * static_cast<std::size_t>(c);
    stride *= static_cast<std::size_t>(part.cells_per_axis[j]);
  }
  return index;
}

}  // namespace levydpp
