#pragma once

// Built-in test problems. Every problem is scalar in state, noise, and
// action; together they cover deterministic transport, Lipschitz diffusion
// with finite jumps, feedback-worthy diffusion, a two-stage pure-jump
// problem with an exact oracle, and an infinite-activity heavy tail.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levydpp/control.hpp"
#include "levydpp/dp_oracle.hpp"
#include "levydpp/dynamics.hpp"
#include "levydpp/levy_measure.hpp"
#include "levydpp/value.hpp"

namespace levydpp {

struct Problem {
  std::string name;
  CoefficientSet coeffs;
  CostSpec cost;
  LevyMeasureSpec spec;
  ActionSet action_set = ActionSet::finite_grid({Vec{0.0}});
  double s = 0;
  double T = 1;
  Vec x0{0.0};
  std::vector<double> family_breaks;
  std::optional<LatticeSpec> feedback;
  double dt = 1.0 / 64.0;
  double default_M = 8;
  std::vector<double> M_list{1, 8};
  // Declared deterministic allowances, printed next to every statistical
  // gate they enter.
  double delta_dt = 0.01;
  double near_martingale_allowance = 0.01;
  // Interpolation grid for mid-horizon value tables.
  double table_lo = -4, table_hi = 4, table_step = 0.25;
  std::function<double(double t, double y)> analytic_value;  // null unless known
  std::optional<DiscreteProblem> discrete;
  std::size_t family_cap = 4096;

  // Policy family for the sub-horizon [from_t, T]: the breaks after from_t,
  // with feedback segments carried over.
  std::vector<ControlPolicy> family(double from_t) const {
    std::vector<double> breaks;
    std::size_t dropped = 0;
    for (double b : family_breaks) {
      if (b > from_t && b < T)
        breaks.push_back(b);
      else if (b <= from_t)
        ++dropped;
    }
    std::optional<LatticeSpec> fb = feedback;
    if (fb) fb->from_segment = fb->from_segment > dropped ? fb->from_segment - dropped : 0;
    return enumerate_policies(action_set, breaks, fb, family_cap);
  }

  std::vector<ControlPolicy> full_family() const { return family(s); }
};

namespace detail {

inline DriftFn scalar_drift(std::function<double(double, double, double)> fn) {
  return [fn = std::move(fn)](double t, std::span<const double> x, std::span<const double> u,
                              std::span<double> out) { out[0] = fn(t, x[0], u[0]); };
}

inline DiffusionFn scalar_diffusion(double level) {
  return [level](double, std::span<const double>, std::span<const double>,
                 std::span<double> out) { out[0] = level; };
}

inline JumpFn scalar_jump(std::function<double(double, double, double, double)> fn) {
  return [fn = std::move(fn)](double t, std::span<const double> x, std::span<const double> u,
                              std::span<const double> eta, std::span<double> out) {
    out[0] = fn(t, x[0], u[0], eta[0]);
  };
}

inline CostSpec tanh_terminal_cost() {
  CostSpec cost;
  cost.f = [](double, std::span<const double>, std::span<const double>) { return 0.0; };
  cost.h = [](std::span<const double> x) { return std::tanh(x[0]); };
  cost.f_bound = 0;
  cost.h_bound = 1;
  cost.h_lip = 1;
  return cost;
}

inline Problem make_deterministic() {
  Problem p;
  p.name = "deterministic";
  p.coeffs.b = scalar_drift([](double, double, double u) { return u; });
  p.coeffs.sigma = scalar_diffusion(0.0);
  p.coeffs.gamma = scalar_jump([](double, double, double, double) { return 0.0; });
  p.coeffs.lip_C = 1.0;
  p.coeffs.lip_CM = [](double) { return 1.0; };
  p.cost = tanh_terminal_cost();
  p.spec.small_part = NoPart{};
  p.spec.large_part = NoPart{};
  p.action_set = ActionSet::finite_grid({Vec{-1.0}, Vec{1.0}});
  p.x0 = Vec{0.2};
  p.family_breaks = {0.5};
  p.M_list = {1, 2};
  p.delta_dt = 1e-9;
  p.near_martingale_allowance = 1e-9;
  // u = +1 throughout is optimal: h is increasing and |u| <= 1, so the
  // reachable terminal maximum is y + (T - t).
  p.analytic_value = [T = p.T](double t, double y) { return std::tanh(y + (T - t)); };
  return p;
}

inline Problem make_linear_drift() {
  Problem p;
  p.name = "linear-drift";
  p.coeffs.b = scalar_drift([](double, double x, double u) { return u - 0.5 * x; });
  p.coeffs.sigma = scalar_diffusion(0.7);
  p.coeffs.gamma = scalar_jump([](double, double, double, double eta) { return 0.1 * eta; });
  p.coeffs.lip_C = 2.0;
  p.coeffs.lip_CM = [](double) { return 0.1; };
  p.cost.f = [](double, std::span<const double> x, std::span<const double>) {
    return 0.4 * std::sin(x[0]);
  };
  p.cost.h = [](std::span<const double> x) { return std::tanh(x[0]); };
  p.cost.f_bound = 0.4;
  p.cost.h_bound = 1;
  p.cost.f_lip = 0.4;
  p.cost.h_lip = 1;
  p.spec.large_part = PointMassesPart{{PointMass{Vec{1.5}, 0.4}, PointMass{Vec{-1.5}, 0.4}}};
  p.action_set = ActionSet::finite_grid({Vec{-1.0}, Vec{0.0}, Vec{1.0}});
  p.family_breaks = {0.5};
  p.M_list = {1, 2, 8};
  p.delta_dt = 0.02;
  p.near_martingale_allowance = 0.06;
  return p;
}

inline Problem make_controlled_sign_drift() {
  Problem p;
  p.name = "controlled-sign-drift";
  p.coeffs.b = scalar_drift([](double, double, double u) { return u; });
  p.coeffs.sigma = scalar_diffusion(0.5);
  p.coeffs.gamma = scalar_jump([](double, double, double, double) { return 0.0; });
  p.coeffs.lip_C = 1.5;
  p.coeffs.lip_CM = [](double) { return 1.0; };
  p.cost.f = [](double, std::span<const double>, std::span<const double>) { return 0.0; };
  p.cost.h = [](std::span<const double> x) { return 1.0 / (1.0 + x[0] * x[0]); };
  p.cost.f_bound = 0;
  p.cost.h_bound = 1;
  p.cost.h_lip = 0.65;
  p.action_set = ActionSet::finite_grid({Vec{-1.0}, Vec{1.0}});
  p.x0 = Vec{1.0};
  p.family_breaks = {0.5};
  p.feedback = LatticeSpec{-1.5, 1.0, 3, 1};
  p.M_list = {1};
  p.delta_dt = 0.01;
  p.near_martingale_allowance = 0.03;
  p.table_lo = -3;
  p.table_hi = 3;
  return p;
}

inline Problem make_pure_jump() {
  Problem p;
  p.name = "pure-jump";
  p.coeffs.b = scalar_drift([](double, double, double) { return 0.0; });
  p.coeffs.sigma = scalar_diffusion(0.0);
  p.coeffs.gamma = scalar_jump([](double, double, double u, double eta) { return u * eta; });
  p.coeffs.lip_C = 1.0;
  p.coeffs.lip_CM = [](double) { return 1.0; };
  p.cost.f = [](double, std::span<const double>, std::span<const double>) { return 0.0; };
  p.cost.h = [](std::span<const double> x) { return std::tanh(0.8 * (x[0] - 1.0)); };
  p.cost.f_bound = 0;
  p.cost.h_bound = 1;
  p.cost.h_lip = 0.8;
  p.spec.large_part = PointMassesPart{{PointMass{Vec{1.0}, 0.6}}};
  p.action_set = ActionSet::finite_grid({Vec{0.0}, Vec{1.0}});
  p.T = 2;
  p.family_breaks = {1.0};
  p.dt = 1.0;  // the scheme is exact here; only stage boundaries matter
  p.M_list = {1, 8};
  p.delta_dt = 0;
  p.near_martingale_allowance = 1e-9;
  DiscreteProblem d;
  d.stage_times = {0.0, 1.0, 2.0};
  d.actions = {0.0, 1.0};
  d.law = [](std::size_t, std::size_t action) {
    return poisson_displacements(0.6, action == 0 ? 0.0 : 1.0);
  };
  d.h = [](double x) { return std::tanh(0.8 * (x - 1.0)); };
  p.discrete = std::move(d);
  return p;
}

inline Problem make_heavy_tail() {
  Problem p;
  p.name = "heavy-tail";
  p.coeffs.b = scalar_drift([](double, double, double u) { return u; });
  p.coeffs.sigma = scalar_diffusion(0.3);
  p.coeffs.gamma = scalar_jump([](double, double, double, double eta) { return eta; });
  p.coeffs.lip_C = 1.3;
  p.coeffs.lip_CM = [](double) { return 1.0; };
  p.cost = tanh_terminal_cost();
  p.spec.small_part = PowerLawPart{1.0, 0.5};
  p.spec.large_part = PowerLawPart{1.0, 0.5};
  p.spec.small_cutoff = 0.25;
  p.action_set = ActionSet::finite_grid({Vec{-1.0}, Vec{1.0}});
  p.family_breaks = {0.5};
  p.M_list = {1, 2, 4, 8, 16};
  p.delta_dt = 1e-9;
  p.near_martingale_allowance = 0.05;
  p.table_lo = -40;
  p.table_hi = 40;
  p.table_step = 0.5;
  return p;
}

}  // namespace detail

inline std::vector<std::string> registry_names() {
  return {"deterministic", "linear-drift", "controlled-sign-drift", "pure-jump", "heavy-tail"};
}

inline Problem make_problem(const std::string& name) {
  if (name == "deterministic") return detail::make_deterministic();
  if (name == "linear-drift") return detail::make_linear_drift();
  if (name == "controlled-sign-drift") return detail::make_controlled_sign_drift();
  if (name == "pure-jump") return detail::make_pure_jump();
  if (name == "heavy-tail") return detail::make_heavy_tail();
  throw std::invalid_argument("make_problem: unknown problem '" + name + "'");
}

}  // namespace levydpp
