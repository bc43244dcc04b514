#pragma once

// Parametric jump measures with closed-form tail masses and band rates.
// The small part lives on 0<|eta|<1, the large part on |eta|>=1. Only the
// band [cutoff,1) of the small part is simulated; the sub-cutoff remainder
// is dropped (optionally replaced by a matched-variance Gaussian term).

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "levydpp/common.hpp"
#include "levydpp/quadrature.hpp"
#include "levydpp/stats.hpp"

namespace levydpp {

struct NoPart {};

// Symmetric one-dimensional density c*|eta|^(-1-alpha) on each side of 0.
struct PowerLawPart {
  double c = 1.0;
  double alpha = 0.5;
};

struct PointMass {
  Vec mark;
  double rate = 0;
};

struct PointMassesPart {
  std::vector<PointMass> masses;
};

// Radius 1 + Lognormal(mu, sigma), total arrival rate `rate`, direction
// uniform on the unit sphere (a fair sign for one-dimensional marks).
struct LognormalShiftedPart {
  double rate = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
};

using SmallPart = std::variant<NoPart, PowerLawPart>;
using LargePart = std::variant<NoPart, PowerLawPart, PointMassesPart, LognormalShiftedPart>;

struct LevyMeasureSpec {
  int jump_dim = 1;
  SmallPart small_part = NoPart{};
  LargePart large_part = NoPart{};
  double small_cutoff = 1.0;
  bool gaussian_refinement = false;
};

inline void validate(const LevyMeasureSpec& spec) {
  std::vector<std::string> faults;
  if (spec.jump_dim < 1) faults.push_back("jump_dim must be >= 1");
  if (!(spec.small_cutoff > 0) || spec.small_cutoff > 1)
    faults.push_back("small_cutoff must lie in (0,1]");
  const auto check_power_law = [&](const PowerLawPart& p, const char* which) {
    if (!(p.c > 0)) faults.push_back(std::string(which) + ": c must be positive");
    if (!(p.alpha > 0) || !(p.alpha < 2))
      faults.push_back(std::string(which) + ": alpha must lie in (0,2)");
    if (spec.jump_dim != 1)
      faults.push_back(std::string(which) + ": power_law requires jump_dim == 1");
  };
  if (const auto* p = std::get_if<PowerLawPart>(&spec.small_part))
    check_power_law(*p, "small_part");
  if (const auto* p = std::get_if<PowerLawPart>(&spec.large_part))
    check_power_law(*p, "large_part");
  if (const auto* pm = std::get_if<PointMassesPart>(&spec.large_part)) {
    if (pm->masses.empty()) faults.push_back("large_part: point_masses must be nonempty");
    for (std::size_t i = 0; i < pm->masses.size(); ++i) {
      const auto& m = pm->masses[i];
      if (static_cast<int>(m.mark.size()) != spec.jump_dim)
        faults.push_back("large_part: mass " + std::to_string(i) + " mark dimension mismatch");
      else if (norm2(m.mark) < 1.0)
        faults.push_back("large_part: mass " + std::to_string(i) + " has |mark| < 1");
      if (!(m.rate > 0))
        faults.push_back("large_part: mass " + std::to_string(i) + " rate must be positive");
    }
  }
  if (const auto* ln = std::get_if<LognormalShiftedPart>(&spec.large_part)) {
    if (!(ln->rate > 0)) faults.push_back("large_part: lognormal rate must be positive");
    if (!(ln->sigma > 0)) faults.push_back("large_part: lognormal sigma must be positive");
  }
  if (spec.gaussian_refinement && spec.jump_dim != 1)
    faults.push_back("gaussian_refinement requires jump_dim == 1");
  if (!faults.empty()) {
    std::ostringstream oss;
    oss << "invalid LevyMeasureSpec:";
    for (const auto& f : faults) oss << "\n  " << f;
    throw std::invalid_argument(oss.str());
  }
}

// Mass of the large part at or beyond radius M >= 1.
inline double large_tail_mass(const LargePart& part, double M) {
  if (std::holds_alternative<NoPart>(part)) return 0.0;
  if (const auto* p = std::get_if<PowerLawPart>(&part))
    return 2.0 * p->c * std::pow(M, -p->alpha) / p->alpha;
  if (const auto* pm = std::get_if<PointMassesPart>(&part)) {
    double total = 0;
    for (const auto& m : pm->masses)
      if (norm2(m.mark) >= M) total += m.rate;
    return total;
  }
  const auto& ln = std::get<LognormalShiftedPart>(part);
  if (M <= 1.0) return ln.rate;
  // P(1 + exp(mu + sigma Z) >= M) = 1 - Phi((log(M-1) - mu)/sigma)
  return ln.rate * (1.0 - normal_cdf((std::log(M - 1.0) - ln.mu) / ln.sigma));
}

// Rate of the simulated small band [lo, hi) with cutoff <= lo < hi <= 1.
inline double band_mass(const SmallPart& part, double lo, double hi) {
  if (std::holds_alternative<NoPart>(part) || lo >= hi) return 0.0;
  const auto& p = std::get<PowerLawPart>(part);
  return 2.0 * p.c * (std::pow(lo, -p.alpha) - std::pow(hi, -p.alpha)) / p.alpha;
}

inline double total_large_rate(const LevyMeasureSpec& spec) {
  return large_tail_mass(spec.large_part, 1.0);
}

inline double band_rate(const LevyMeasureSpec& spec) {
  return band_mass(spec.small_part, spec.small_cutoff, 1.0);
}

// nu(E_M) = nu({|eta| >= M}), exact per family.
inline double tail_mass(const LevyMeasureSpec& spec, double M) {
  if (M < spec.small_cutoff)
    throw std::invalid_argument("tail_mass: M below small_cutoff");
  if (M < 1.0)
    return band_mass(spec.small_part, M, 1.0) + total_large_rate(spec);
  return large_tail_mass(spec.large_part, M);
}

// Variance integral of the dropped region: int_{0<|eta|<cutoff} |eta|^2 nu(d eta).
inline double sub_cutoff_variance(const LevyMeasureSpec& spec) {
  if (std::holds_alternative<NoPart>(spec.small_part)) return 0.0;
  const auto& p = std::get<PowerLawPart>(spec.small_part);
  return 2.0 * p.c * std::pow(spec.small_cutoff, 2.0 - p.alpha) / (2.0 - p.alpha);
}

// Discrete representation of the band measure restricted to [cutoff, 1):
// sum_i weights[i] * g(marks[i]) approximates int_band g d(nu). Weights are
// exact masses of a quadrature discretization, so smooth g integrate to
// near machine precision and odd g integrate to exactly zero.
struct CompensatorRule {
  std::vector<Vec> marks;
  std::vector<double> weights;
};

inline CompensatorRule small_jump_compensator(const LevyMeasureSpec& spec, int nodes = 64) {
  CompensatorRule rule;
  if (std::holds_alternative<NoPart>(spec.small_part) || spec.small_cutoff >= 1.0)
    return rule;
  const auto& p = std::get<PowerLawPart>(spec.small_part);
  // Substituting v = r^(-alpha) gives
  //   int_cut^1 g(r) c r^(-1-alpha) dr = (c/alpha) int_1^{cut^-alpha} g(v^(-1/alpha)) dv,
  // a smooth integrand handled by Gauss-Legendre. Nodes are mirrored so the
  // rule is exactly symmetric under eta -> -eta.
  const QuadratureRule gl = gauss_legendre(nodes, 1.0, std::pow(spec.small_cutoff, -p.alpha));
  rule.marks.reserve(2 * gl.nodes.size());
  rule.weights.reserve(2 * gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = std::pow(gl.nodes[i], -1.0 / p.alpha);
    const double w = p.c / p.alpha * gl.weights[i];
    rule.marks.push_back(Vec{r});
    rule.weights.push_back(w);
    rule.marks.push_back(Vec{-r});
    rule.weights.push_back(w);
  }
  return rule;
}

}  // namespace levydpp
