#pragma once

// Shared small types and numeric utilities for the toolkit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace levydpp {

using Vec = std::vector<double>;

// Thrown when a Monte Carlo estimate cannot be formed (e.g. every path diverged).
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an enumeration or lattice exceeds its configured cap.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sentinel for "no exceedance before any horizon". Strictly greater than every
// finite horizon; compare through the predicates below, never arithmetically.
inline constexpr double kNoExceedance = std::numeric_limits<double>::max();

inline bool never_exceeds(double t) { return t == kNoExceedance; }
inline bool exceeds_by(double t, double horizon) { return !never_exceeds(t) && t <= horizon; }

// Default guard radius: paths whose sup-norm passes this are flagged diverged.
inline constexpr double kDefaultDivergenceGuard = 1e12;

inline double sq(double x) { return x * x; }

inline double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double sup_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Pairwise (cascade) summation: the result depends only on the values and their
// order in `v`, not on which worker produced them, and the error grows like
// O(log n) ulps instead of O(n).
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

// Static block partition of [0, n) over `workers` threads. Each index is
// handled exactly once and results must be written to per-index slots, so the
// outcome is identical for every worker count.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([t, w, n, &fn] {
      for (std::size_t i = t; i < n; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Uniform grid on [s,T] with `extra` points merged in (deduplicated, sorted).
inline std::vector<double> make_grid(double s, double T, double dt,
                                     std::span<const double> extra = {}) {
  if (!(s < T)) throw std::invalid_argument("make_grid: need s < T");
  if (!(dt > 0)) throw std::invalid_argument("make_grid: need dt > 0");
  const auto n = static_cast<std::size_t>(std::ceil((T - s) / dt - 1e-12));
  std::vector<double> g;
  g.reserve(n + 1 + extra.size());
  for (std::size_t i = 0; i < n; ++i) g.push_back(s + (T - s) * static_cast<double>(i) / static_cast<double>(n));
  g.push_back(T);
  for (double e : extra)
    if (e > s && e < T) g.push_back(e);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace levydpp
