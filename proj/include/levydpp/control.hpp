#pragma once

// Admissible controls as evaluable policies over a compact action set.
// Two entry points share one convention: actions are constant on left-open
// grid intervals, and everything a policy reads is measurable at the moment
// the action takes effect.
//
//   action_for_interval(p, h): action in force on (t_k, t_{k+1}], decided
//     from the history through t_k (the post-jump state at t_k included).
//   evaluate(p, t, h): the control value at time t, reading only data
//     strictly before t; feedback reads the left limit X_{t-}.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "levydpp/common.hpp"
#include "levydpp/noise.hpp"

namespace levydpp {

struct ActionSet {
  std::vector<Vec> actions;

  static ActionSet finite_grid(std::vector<Vec> list) {
    if (list.empty()) throw std::invalid_argument("ActionSet: empty action list");
    const std::size_t dim = list.front().size();
    for (const auto& a : list)
      if (a.size() != dim) throw std::invalid_argument("ActionSet: inconsistent action dims");
    return ActionSet{std::move(list)};
  }

  static ActionSet box(const Vec& lower, const Vec& upper, int points_per_dim) {
    if (lower.size() != upper.size() || lower.empty())
      throw std::invalid_argument("ActionSet: bad box bounds");
    if (points_per_dim < 1) throw std::invalid_argument("ActionSet: points_per_dim < 1");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i])) throw std::invalid_argument("ActionSet: lower > upper");
    const std::size_t dim = lower.size();
    double total = std::pow(static_cast<double>(points_per_dim), static_cast<double>(dim));
    if (total > 4096)
      throw BudgetError("ActionSet: box grid of " + std::to_string(total) + " actions exceeds cap 4096");
    std::vector<Vec> list;
    Vec point(dim);
    std::vector<int> idx(dim, 0);
    for (;;) {
      for (std::size_t i = 0; i < dim; ++i)
        point[i] = points_per_dim == 1
                       ? 0.5 * (lower[i] + upper[i])
                       : lower[i] + (upper[i] - lower[i]) * idx[i] / (points_per_dim - 1);
      list.push_back(point);
      std::size_t i = 0;
      for (; i < dim; ++i) {
        if (++idx[i] < points_per_dim) break;
        idx[i] = 0;
      }
      if (i == dim) break;
    }
    return ActionSet{std::move(list)};
  }

  int action_dim() const { return static_cast<int>(actions.front().size()); }

  bool contains(std::span<const double> a) const {
    for (const auto& cand : actions)
      if (cand.size() == a.size() && std::equal(cand.begin(), cand.end(), a.begin())) return true;
    return false;
  }
};

struct StoppingRule {
  enum class Kind { deterministic, first_jump, first_exceed, first_exit_ball };
  Kind kind = Kind::deterministic;
  double time = 0;
  double level = 1;
  double radius = 0;

  static StoppingRule at(double t) { return {Kind::deterministic, t, 1, 0}; }
  static StoppingRule first_jump() { return {Kind::first_jump, 0, 1, 0}; }
  static StoppingRule first_exceed(double M) { return {Kind::first_exceed, 0, M, 0}; }
  static StoppingRule first_exit_ball(double r) { return {Kind::first_exit_ball, 0, 1, r}; }
};

// Read-only window onto a (possibly still growing) path: grid times covered
// so far, post-jump states, pre-jump left limits, and the jump events whose
// times fall inside the window.
struct HistoryView {
  std::span<const double> times;
  std::span<const double> states;
  std::span<const double> left_states;
  std::span<const JumpEvent> events;
  int state_dim = 1;

  std::span<const double> state_at(std::size_t i) const {
    return states.subspan(i * state_dim, state_dim);
  }
  std::span<const double> left_state_at(std::size_t i) const {
    return left_states.subspan(i * state_dim, state_dim);
  }
};

// Stopping time as determined by the history window: the realized value if
// it falls inside the window (deterministic rules always resolve), else the
// no-exceedance sentinel.
inline double stop_time_so_far(const StoppingRule& rule, const HistoryView& h) {
  switch (rule.kind) {
    case StoppingRule::Kind::deterministic:
      return rule.time;
    case StoppingRule::Kind::first_jump:
      return h.events.empty() ? kNoExceedance : h.events.front().time;
    case StoppingRule::Kind::first_exceed:
      for (const auto& ev : h.events)
        if (norm2(ev.mark) >= rule.level) return ev.time;
      return kNoExceedance;
    case StoppingRule::Kind::first_exit_ball:
      for (std::size_t i = 0; i < h.times.size(); ++i)
        if (norm2(h.state_at(i)) >= rule.radius) return h.times[i];
      return kNoExceedance;
  }
  throw std::logic_error("stop_time_so_far: bad kind");
}

// Realized stopping time capped at the horizon, for a window covering [s,T].
inline double stop_time(const StoppingRule& rule, const HistoryView& full, double T) {
  const double tau = stop_time_so_far(rule, full);
  return never_exceeds(tau) ? T : std::min(tau, T);
}

struct ControlPolicy;

struct ConstantPolicy {
  Vec action;
};

// Action i in force on (breaks[i-1], breaks[i]]; switches strictly after
// each breakpoint.
struct PiecewisePolicy {
  std::vector<double> breaks;
  std::vector<Vec> actions;
};

// Per time segment, either one unconditional action (cells_per_segment 1)
// or one action per cell of a lattice on state coordinate 0, read from the
// left limit. Actions are stored flattened segment by segment.
struct LatticeFeedbackPolicy {
  std::vector<double> breaks;
  double cell_lower = 0;
  double cell_width = 1;
  int n_cells = 1;
  std::vector<int> cells_per_segment;
  std::vector<Vec> actions;

  int cell_of(double x) const {
    const int c = static_cast<int>(std::floor((x - cell_lower) / cell_width));
    return std::clamp(c, 0, n_cells - 1);
  }
};

struct ConcatenatedPolicy {
  std::shared_ptr<const ControlPolicy> first;
  std::shared_ptr<const ControlPolicy> second;
  StoppingRule switch_rule;
};

struct ControlPolicy {
  std::variant<ConstantPolicy, PiecewisePolicy, LatticeFeedbackPolicy, ConcatenatedPolicy> v;

  static ControlPolicy constant(Vec a) { return {ConstantPolicy{std::move(a)}}; }

  static ControlPolicy piecewise(std::vector<double> breaks, std::vector<Vec> actions) {
    if (actions.size() != breaks.size() + 1)
      throw std::invalid_argument("ControlPolicy: need |breaks|+1 actions");
    if (!std::is_sorted(breaks.begin(), breaks.end()))
      throw std::invalid_argument("ControlPolicy: breaks must be sorted");
    return {PiecewisePolicy{std::move(breaks), std::move(actions)}};
  }

  static ControlPolicy lattice_feedback(LatticeFeedbackPolicy p) {
    std::size_t slots = 0;
    for (int c : p.cells_per_segment) slots += static_cast<std::size_t>(c);
    if (p.cells_per_segment.size() != p.breaks.size() + 1 || p.actions.size() != slots)
      throw std::invalid_argument("ControlPolicy: lattice shape mismatch");
    if (p.n_cells < 1 || !(p.cell_width > 0))
      throw std::invalid_argument("ControlPolicy: bad lattice geometry");
    return {std::move(p)};
  }
};

inline ControlPolicy concatenate(ControlPolicy first, ControlPolicy second, StoppingRule rule) {
  return {ConcatenatedPolicy{std::make_shared<const ControlPolicy>(std::move(first)),
                             std::make_shared<const ControlPolicy>(std::move(second)), rule}};
}

namespace detail {

// #breaks <= t (interval protocol) or #breaks < t (instantaneous evaluation).
inline std::size_t segment_index(const std::vector<double>& breaks, double t, bool inclusive) {
  std::size_t k = 0;
  for (double b : breaks)
    if (inclusive ? b <= t : b < t) ++k;
  return k;
}

// Left limit X_{t-} as the window knows it: the stored left limit when t is
// a grid point, else the state at the last grid point before t.
inline std::span<const double> left_limit_at(const HistoryView& h, double t) {
  const auto end = h.times.end();
  const auto it = std::lower_bound(h.times.begin(), end, t);
  if (it != end && *it == t) return h.left_state_at(static_cast<std::size_t>(it - h.times.begin()));
  if (it == h.times.begin())
    throw std::invalid_argument("policy evaluation: time precedes history");
  return h.state_at(static_cast<std::size_t>(it - h.times.begin()) - 1);
}

inline Vec eval_policy(const ControlPolicy& p, double t, const HistoryView& h, bool interval);

inline Vec eval_lattice(const LatticeFeedbackPolicy& p, double t, const HistoryView& h,
                        bool interval) {
  const std::size_t seg = std::min(segment_index(p.breaks, t, interval),
                                   p.cells_per_segment.size() - 1);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < seg; ++j) offset += static_cast<std::size_t>(p.cells_per_segment[j]);
  if (p.cells_per_segment[seg] == 1) return p.actions[offset];
  const std::span<const double> x =
      interval ? h.state_at(h.times.size() - 1) : left_limit_at(h, t);
  return p.actions[offset + static_cast<std::size_t>(p.cell_of(x[0]))];
}

inline Vec eval_policy(const ControlPolicy& p, double t, const HistoryView& h, bool interval) {
  if (const auto* c = std::get_if<ConstantPolicy>(&p.v)) return c->action;
  if (const auto* pw = std::get_if<PiecewisePolicy>(&p.v)) {
    const std::size_t seg =
        std::min(segment_index(pw->breaks, t, interval), pw->actions.size() - 1);
    return pw->actions[seg];
  }
  if (const auto* lf = std::get_if<LatticeFeedbackPolicy>(&p.v))
    return eval_lattice(*lf, t, h, interval);
  const auto& cc = std::get<ConcatenatedPolicy>(p.v);
  const double tau = stop_time_so_far(cc.switch_rule, h);
  const bool switched = !never_exceeds(tau) && (interval ? tau <= t : tau < t);
  return eval_policy(switched ? *cc.second : *cc.first, t, h, interval);
}

}  // namespace detail

// Control value at time t; reads only data strictly before t.
inline Vec evaluate(const ControlPolicy& policy, double t, const HistoryView& h) {
  if (h.times.empty()) throw std::invalid_argument("evaluate: empty history");
  if (t < h.times.front() || t > h.times.back())
    throw std::invalid_argument("evaluate: t outside the history's time range");
  return detail::eval_policy(policy, t, h, false);
}

// Action in force on (t_k, t_{k+1}] where t_k is the window's last time.
inline Vec action_for_interval(const ControlPolicy& policy, const HistoryView& h) {
  if (h.times.empty()) throw std::invalid_argument("action_for_interval: empty history");
  return detail::eval_policy(policy, h.times.back(), h, true);
}

// Deterministic times at which a policy can switch; callers put these into
// the base time grid so every switch lands on a grid point.
inline void collect_breakpoints(const ControlPolicy& p, std::vector<double>& out) {
  if (const auto* pw = std::get_if<PiecewisePolicy>(&p.v))
    out.insert(out.end(), pw->breaks.begin(), pw->breaks.end());
  else if (const auto* lf = std::get_if<LatticeFeedbackPolicy>(&p.v))
    out.insert(out.end(), lf->breaks.begin(), lf->breaks.end());
  else if (const auto* cc = std::get_if<ConcatenatedPolicy>(&p.v)) {
    collect_breakpoints(*cc->first, out);
    collect_breakpoints(*cc->second, out);
    if (cc->switch_rule.kind == StoppingRule::Kind::deterministic)
      out.push_back(cc->switch_rule.time);
  }
}

inline std::vector<double> breakpoints(const ControlPolicy& p) {
  std::vector<double> out;
  collect_breakpoints(p, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct LatticeSpec {
  double cell_lower = 0;
  double cell_width = 1;
  int n_cells = 1;
  std::size_t from_segment = 1;  // earlier segments stay open-loop
};

// The full cartesian family over (segment, cell) slots; size |A|^slots.
inline std::vector<ControlPolicy> enumerate_policies(const ActionSet& A,
                                                     const std::vector<double>& breaks,
                                                     const std::optional<LatticeSpec>& lattice,
                                                     std::size_t cap = 4096) {
  if (!std::is_sorted(breaks.begin(), breaks.end()))
    throw std::invalid_argument("enumerate_policies: breaks must be sorted");
  const std::size_t n_seg = breaks.size() + 1;
  std::vector<int> cells(n_seg, 1);
  if (lattice) {
    if (lattice->n_cells < 1 || !(lattice->cell_width > 0))
      throw std::invalid_argument("enumerate_policies: bad lattice");
    for (std::size_t j = lattice->from_segment; j < n_seg; ++j) cells[j] = lattice->n_cells;
  }
  std::size_t slots = 0;
  for (int c : cells) slots += static_cast<std::size_t>(c);
  const double base = static_cast<double>(A.actions.size());
  const double size_d = std::pow(base, static_cast<double>(slots));
  if (size_d > static_cast<double>(cap)) {
    std::ostringstream oss;
    oss << "enumerate_policies: family size " << size_d << " exceeds cap " << cap;
    throw BudgetError(oss.str());
  }
  const std::size_t size = static_cast<std::size_t>(size_d + 0.5);

  std::vector<ControlPolicy> family;
  family.reserve(size);
  const std::size_t nA = A.actions.size();
  for (std::size_t id = 0; id < size; ++id) {
    std::vector<Vec> chosen(slots);
    std::size_t rem = id;
    for (std::size_t sidx = 0; sidx < slots; ++sidx) {
      chosen[sidx] = A.actions[rem % nA];
      rem /= nA;
    }
    if (!lattice) {
      family.push_back(ControlPolicy::piecewise(breaks, std::move(chosen)));
    } else {
      LatticeFeedbackPolicy p;
      p.breaks = breaks;
      p.cell_lower = lattice->cell_lower;
      p.cell_width = lattice->cell_width;
      p.n_cells = lattice->n_cells;
      p.cells_per_segment = cells;
      p.actions = std::move(chosen);
      family.push_back(ControlPolicy::lattice_feedback(std::move(p)));
    }
  }
  return family;
}

}  // namespace levydpp
