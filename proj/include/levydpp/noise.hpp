#pragma once

// Driving-noise sampling: Brownian increments on a jump-refined grid plus the
// time-ordered jump events of the band and large parts. One realization is
// shared by the truncated and untruncated integrators, which is what makes
// their pathwise coupling exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "levydpp/common.hpp"
#include "levydpp/levy_measure.hpp"
#include "levydpp/rng.hpp"

namespace levydpp {

struct TruncationLevel {
  double M;
  explicit TruncationLevel(double level) : M(level) {
    if (!(M >= 1.0)) throw std::invalid_argument("TruncationLevel: M must be >= 1");
  }
};

struct JumpEvent {
  double time;
  Vec mark;
};

struct NoiseRealization {
  std::uint64_t seed = 0;
  double s = 0, T = 0;
  int brownian_dim = 0;
  std::vector<double> time_grid;                 // base grid with event times inserted
  std::vector<double> brownian_increments;       // (intervals x brownian_dim) row-major
  std::vector<double> refinement_increments;     // per interval, empty when refinement off
  std::vector<JumpEvent> jump_events;            // strictly increasing times in (s,T]
  std::vector<std::size_t> jump_grid_index;      // position of each event time in time_grid
  CompensatorRule compensator;                   // band measure for the drift correction
  double refinement_delta = 0;                   // finite-difference half-width for refinement

  std::size_t intervals() const { return time_grid.empty() ? 0 : time_grid.size() - 1; }
};

namespace detail {

// Homogeneous arrivals on (s,T] at `rate`, each marked by `draw_mark`.
template <class MarkFn>
void sample_arrivals(double rate, double s, double T, Rng& rng, MarkFn&& draw_mark,
                     std::vector<JumpEvent>& out) {
  if (rate <= 0) return;
  double t = s;
  for (;;) {
    t += rng.exponential(rate);
    if (t > T) break;
    out.push_back(JumpEvent{t, draw_mark(rng)});
  }
}

inline Vec sphere_direction(int q, Rng& rng) {
  if (q == 1) return Vec{rng.uniform() < 0.5 ? -1.0 : 1.0};
  Vec dir(q);
  double n = 0;
  do {
    for (auto& c : dir) c = rng.normal();
    n = norm2(dir);
  } while (n < 1e-12);
  for (auto& c : dir) c /= n;
  return dir;
}

inline std::vector<JumpEvent> sample_band_events(const LevyMeasureSpec& spec, double s,
                                                 double T, Rng& rng) {
  std::vector<JumpEvent> out;
  const double rate = band_rate(spec);
  if (rate <= 0) return out;
  const auto& p = std::get<PowerLawPart>(spec.small_part);
  const double lo_pow = std::pow(spec.small_cutoff, -p.alpha);
  sample_arrivals(rate, s, T, rng,
                  [&](Rng& r) {
                    // Inverse CDF of the normalized band radius law on [cutoff,1).
                    const double v = lo_pow - r.uniform() * (lo_pow - 1.0);
                    const double radius = std::pow(v, -1.0 / p.alpha);
                    return Vec{r.uniform() < 0.5 ? -radius : radius};
                  },
                  out);
  return out;
}

inline std::vector<JumpEvent> sample_large_events(const LevyMeasureSpec& spec, double s,
                                                  double T, Rng& rng) {
  std::vector<JumpEvent> out;
  const double rate = total_large_rate(spec);
  if (rate <= 0) return out;
  if (const auto* p = std::get_if<PowerLawPart>(&spec.large_part)) {
    sample_arrivals(rate, s, T, rng,
                    [&](Rng& r) {
                      const double radius = std::pow(r.uniform_pos(), -1.0 / p->alpha);
                      return Vec{r.uniform() < 0.5 ? -radius : radius};
                    },
                    out);
  } else if (const auto* pm = std::get_if<PointMassesPart>(&spec.large_part)) {
    sample_arrivals(rate, s, T, rng,
                    [&](Rng& r) {
                      double u = r.uniform() * rate;
                      for (const auto& m : pm->masses) {
                        if (u < m.rate) return m.mark;
                        u -= m.rate;
                      }
                      return pm->masses.back().mark;
                    },
                    out);
  } else {
    const auto& ln = std::get<LognormalShiftedPart>(spec.large_part);
    sample_arrivals(rate, s, T, rng,
                    [&](Rng& r) {
                      const double radius = 1.0 + std::exp(ln.mu + ln.sigma * r.normal());
                      Vec mark = sphere_direction(spec.jump_dim, r);
                      for (auto& c : mark) c *= radius;
                      return mark;
                    },
                    out);
  }
  return out;
}

}  // namespace detail

inline NoiseRealization sample_noise(const LevyMeasureSpec& spec, int brownian_dim, double s,
                                     double T, const std::vector<double>& grid,
                                     std::uint64_t seed) {
  validate(spec);
  if (brownian_dim < 0) throw std::invalid_argument("sample_noise: brownian_dim < 0");
  if (grid.empty()) throw std::invalid_argument("sample_noise: empty grid");
  if (!(s < T)) throw std::invalid_argument("sample_noise: need s < T");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("sample_noise: grid not strictly increasing");
  if (grid.front() != s || grid.back() != T)
    throw std::invalid_argument("sample_noise: grid must span [s,T]");

  NoiseRealization noise;
  noise.seed = seed;
  noise.s = s;
  noise.T = T;
  noise.brownian_dim = brownian_dim;
  noise.compensator = small_jump_compensator(spec);
  if (spec.gaussian_refinement) noise.refinement_delta = spec.small_cutoff / 2.0;

  // Independent substreams per purpose keep each component reproducible even
  // if another component's draw count changes.
  Rng band_rng(derive_seed(seed, 1));
  Rng large_rng(derive_seed(seed, 2));
  auto band = detail::sample_band_events(spec, s, T, band_rng);
  auto large = detail::sample_large_events(spec, s, T, large_rng);
  noise.jump_events.reserve(band.size() + large.size());
  std::merge(band.begin(), band.end(), large.begin(), large.end(),
             std::back_inserter(noise.jump_events),
             [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < noise.jump_events.size(); ++i) {
    auto& t = noise.jump_events[i].time;
    while (t <= noise.jump_events[i - 1].time)
      t = std::nextafter(t, std::numeric_limits<double>::max());
  }
  while (!noise.jump_events.empty() && noise.jump_events.back().time > T)
    noise.jump_events.pop_back();

  std::vector<double> extra(noise.jump_events.size());
  for (std::size_t i = 0; i < extra.size(); ++i) extra[i] = noise.jump_events[i].time;
  noise.time_grid = grid;
  noise.time_grid.insert(noise.time_grid.end(), extra.begin(), extra.end());
  std::sort(noise.time_grid.begin(), noise.time_grid.end());
  noise.time_grid.erase(std::unique(noise.time_grid.begin(), noise.time_grid.end()),
                        noise.time_grid.end());

  noise.jump_grid_index.resize(noise.jump_events.size());
  for (std::size_t i = 0; i < noise.jump_events.size(); ++i) {
    const auto it = std::lower_bound(noise.time_grid.begin(), noise.time_grid.end(),
                                     noise.jump_events[i].time);
    noise.jump_grid_index[i] = static_cast<std::size_t>(it - noise.time_grid.begin());
  }

  const std::size_t n_int = noise.intervals();
  Rng brownian_rng(derive_seed(seed, 3));
  noise.brownian_increments.resize(n_int * static_cast<std::size_t>(brownian_dim));
  for (std::size_t i = 0; i < n_int; ++i) {
    const double sd = std::sqrt(noise.time_grid[i + 1] - noise.time_grid[i]);
    for (int j = 0; j < brownian_dim; ++j)
      noise.brownian_increments[i * brownian_dim + j] = sd * brownian_rng.normal();
  }

  const double sub_var = sub_cutoff_variance(spec);
  if (spec.gaussian_refinement && sub_var > 0) {
    Rng refine_rng(derive_seed(seed, 4));
    noise.refinement_increments.resize(n_int);
    for (std::size_t i = 0; i < n_int; ++i) {
      const double sd = std::sqrt(sub_var * (noise.time_grid[i + 1] - noise.time_grid[i]));
      noise.refinement_increments[i] = sd * refine_rng.normal();
    }
  }
  return noise;
}

// Pathwise tau_M: first event time with |mark| >= M, or the no-exceedance
// sentinel when none occurs.
inline double first_exceed_time(const NoiseRealization& noise, TruncationLevel M) {
  for (const auto& ev : noise.jump_events)
    if (norm2(ev.mark) >= M.M) return ev.time;
  return kNoExceedance;
}

// The same realization viewed from a later start point t1, which must be a
// grid point. Events exactly at t1 belong to the earlier segment and are
// dropped; increments are re-sliced untouched.
inline NoiseRealization restrict_noise(const NoiseRealization& noise, double t1) {
  const auto it = std::lower_bound(noise.time_grid.begin(), noise.time_grid.end(), t1);
  if (it == noise.time_grid.end() || *it != t1)
    throw std::invalid_argument("restrict_noise: t1 is not a grid point");
  const std::size_t k = static_cast<std::size_t>(it - noise.time_grid.begin());

  NoiseRealization out;
  out.seed = noise.seed;
  out.s = t1;
  out.T = noise.T;
  out.brownian_dim = noise.brownian_dim;
  out.compensator = noise.compensator;
  out.refinement_delta = noise.refinement_delta;
  out.time_grid.assign(noise.time_grid.begin() + k, noise.time_grid.end());
  const std::size_t m = static_cast<std::size_t>(noise.brownian_dim);
  out.brownian_increments.assign(noise.brownian_increments.begin() + k * m,
                                 noise.brownian_increments.end());
  if (!noise.refinement_increments.empty())
    out.refinement_increments.assign(noise.refinement_increments.begin() + k,
                                     noise.refinement_increments.end());
  for (std::size_t i = 0; i < noise.jump_events.size(); ++i) {
    if (noise.jump_events[i].time <= t1) continue;
    out.jump_events.push_back(noise.jump_events[i]);
    out.jump_grid_index.push_back(noise.jump_grid_index[i] - k);
  }
  return out;
}

}  // namespace levydpp
