#pragma once

// Summary statistics and the distributional test statistics used by the
// verification harness. All reductions go through pairwise_sum so results do
// not depend on accumulation order.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "levydpp/common.hpp"

namespace levydpp {

struct MeanSe {
  double mean = 0;
  double std_error = 0;
  std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.n = xs.size();
  if (out.n == 0) return out;
  out.mean = pairwise_sum(xs) / static_cast<double>(out.n);
  if (out.n == 1) return out;
  std::vector<double> dev2(out.n);
  for (std::size_t i = 0; i < out.n; ++i) dev2[i] = sq(xs[i] - out.mean);
  const double var = pairwise_sum(dev2) / static_cast<double>(out.n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(out.n));
  return out;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Pearson chi-square statistic for observed counts against expected counts.
// Caller fixes the binning and the critical value.
inline double chi_square_stat(std::span<const double> observed,
                              std::span<const double> expected) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_square_stat: size mismatch");
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0)
      throw std::invalid_argument("chi_square_stat: nonpositive expected count");
    stat += sq(observed[i] - expected[i]) / expected[i];
  }
  return stat;
}

// Kolmogorov-Smirnov statistic of a sample against the Exp(rate) law,
// conditioned on the sample being the finite exceedance times.
inline double ks_stat_exponential(std::vector<double> xs, double rate) {
  if (xs.empty()) throw std::invalid_argument("ks_stat_exponential: empty sample");
  if (rate <= 0) throw std::invalid_argument("ks_stat_exponential: rate must be positive");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double stat = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 1.0 - std::exp(-rate * xs[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    stat = std::max({stat, std::abs(cdf - lo), std::abs(hi - cdf)});
  }
  return stat;
}

// Hill estimator of the tail index from the k largest order statistics.
// Returns the reciprocal of the mean log excess over the (k+1)-th largest.
inline double hill_estimator(std::vector<double> xs, std::size_t k) {
  if (k == 0 || xs.size() < k + 1)
    throw std::invalid_argument("hill_estimator: need at least k+1 samples");
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const double pivot = xs[k];
  if (pivot <= 0)
    throw EstimationError("hill_estimator: (k+1)-th order statistic not positive");
  std::vector<double> logs(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (xs[i] <= 0) throw EstimationError("hill_estimator: nonpositive tail sample");
    logs[i] = std::log(xs[i] / pivot);
  }
  const double mean_log = pairwise_sum(logs) / static_cast<double>(k);
  if (mean_log <= 0) throw EstimationError("hill_estimator: degenerate tail");
  return 1.0 / mean_log;
}

}  // namespace levydpp
