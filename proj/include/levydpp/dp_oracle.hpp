#pragma once

// Exact backward induction for desk-scale discrete control problems: one
// scalar state, finitely many actions, per-stage displacement laws with
// finite support, zero running cost. Serves as the bias-free reference for
// the Monte Carlo machinery.

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "levydpp/common.hpp"

namespace levydpp {

struct Outcome {
  double displacement;
  double prob;
};

struct DiscreteProblem {
  std::vector<double> stage_times;  // strictly increasing; stages are the gaps
  std::vector<double> actions;
  std::function<std::vector<Outcome>(std::size_t stage, std::size_t action_index)> law;
  std::function<double(double x)> h;

  std::size_t stages() const { return stage_times.size() - 1; }
};

// Poisson(mean_count) jump count times a fixed per-jump displacement, with
// the tail below tail_tol chopped and the rest renormalized.
inline std::vector<Outcome> poisson_displacements(double mean_count, double per_jump,
                                                  double tail_tol = 1e-16) {
  if (mean_count < 0) throw std::invalid_argument("poisson_displacements: negative mean");
  std::vector<Outcome> out;
  if (mean_count == 0 || per_jump == 0) {
    out.push_back(Outcome{0.0, 1.0});
    return out;
  }
  // Stop once past the mode with the next term below tail_tol; the remaining
  // tail is then bounded by a geometric series with ratio below 1/2.
  double p = std::exp(-mean_count);
  for (int j = 0;; ++j) {
    out.push_back(Outcome{per_jump * j, p});
    p *= mean_count / (j + 1);
    if (j >= 2 * mean_count && p < tail_tol) break;
    if (j > 500) throw std::invalid_argument("poisson_displacements: support too wide");
  }
  double total = 0;
  for (const auto& o : out) total += o.prob;
  for (auto& o : out) o.prob /= total;
  return out;
}

class DpTable {
 public:
  DpTable(const DiscreteProblem& prob, double x0, std::size_t node_cap = 4096)
      : prob_(prob), x0_(x0) {
    if (prob.stage_times.size() < 2)
      throw std::invalid_argument("dp_oracle: need at least one stage");
    if (prob.actions.empty()) throw std::invalid_argument("dp_oracle: no actions");
    const std::size_t K = prob.stages();
    values_.resize(K + 1);
    best_action_.resize(K);

    // Forward reachability closure, then exact backward induction on it.
    std::vector<std::map<double, char>> reach(K + 1);
    reach[0][x0] = 1;
    std::size_t nodes = 1;
    for (std::size_t k = 0; k < K; ++k) {
      for (const auto& [x, unused] : reach[k]) {
        for (std::size_t a = 0; a < prob.actions.size(); ++a) {
          for (const auto& o : prob.law(k, a)) {
            if (reach[k + 1].emplace(x + o.displacement, 1).second) {
              if (++nodes > node_cap)
                throw BudgetError("dp_oracle: node count exceeds cap " +
                                  std::to_string(node_cap));
            }
          }
        }
      }
    }
    for (const auto& [x, unused] : reach[K]) values_[K][x] = prob.h(x);
    for (std::size_t k = K; k-- > 0;) {
      for (const auto& [x, unused] : reach[k]) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        for (std::size_t a = 0; a < prob.actions.size(); ++a) {
          double exp_val = 0;
          for (const auto& o : prob.law(k, a))
            exp_val += o.prob * value(k + 1, x + o.displacement);
          if (exp_val > best) {
            best = exp_val;
            best_a = a;
          }
        }
        values_[k][x] = best;
        best_action_[k][x] = best_a;
      }
    }
  }

  // Stage value at a reachable state; keys match within 1e-9 to absorb
  // float noise in externally recomputed states.
  double value(std::size_t stage, double x) const {
    const auto& table = values_.at(stage);
    const auto it = table.lower_bound(x - 1e-9);
    if (it == table.end() || std::abs(it->first - x) > 1e-9)
      throw std::invalid_argument("dp_oracle: state not reachable at this stage");
    return it->second;
  }

  std::size_t best_action(std::size_t stage, double x) const {
    const auto& table = best_action_.at(stage);
    const auto it = table.lower_bound(x - 1e-9);
    if (it == table.end() || std::abs(it->first - x) > 1e-9)
      throw std::invalid_argument("dp_oracle: state not reachable at this stage");
    return it->second;
  }

  double root() const { return value(0, x0_); }
  const std::map<double, double>& stage_values(std::size_t k) const { return values_.at(k); }

 private:
  DiscreteProblem prob_;
  double x0_;
  std::vector<std::map<double, double>> values_;
  std::vector<std::map<double, std::size_t>> best_action_;
};

inline DpTable dp_oracle(const DiscreteProblem& prob, double x0, std::size_t node_cap = 4096) {
  return DpTable(prob, x0, node_cap);
}

namespace detail {

inline double open_loop_expectation(const DiscreteProblem& prob,
                                    const std::vector<std::size_t>& actions, std::size_t stage,
                                    double x) {
  if (stage == prob.stages()) return prob.h(x);
  double total = 0;
  for (const auto& o : prob.law(stage, actions[stage]))
    total += o.prob * open_loop_expectation(prob, actions, stage + 1, x + o.displacement);
  return total;
}

}  // namespace detail

// Max over every open-loop action sequence of the exact outcome-path
// expectation. Exponential in the stage count; intended for <= 3 stages.
inline double brute_force_open_loop(const DiscreteProblem& prob, double x0) {
  if (prob.stage_times.size() < 2 || prob.stages() > 3)
    throw BudgetError("brute_force_open_loop: needs between 1 and 3 stages");
  std::vector<std::size_t> seq(prob.stages(), 0);
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    best = std::max(best, detail::open_loop_expectation(prob, seq, 0, x0));
    std::size_t k = 0;
    for (; k < seq.size(); ++k) {
      if (++seq[k] < prob.actions.size()) break;
      seq[k] = 0;
    }
    if (k == seq.size()) break;
  }
  return best;
}

// Unmemoized expectimax over feedback strategies; an implementation path
// independent of DpTable, for cross-checking.
inline double expectimax(const DiscreteProblem& prob, std::size_t stage, double x) {
  if (stage == prob.stages()) return prob.h(x);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < prob.actions.size(); ++a) {
    double exp_val = 0;
    for (const auto& o : prob.law(stage, a))
      exp_val += o.prob * expectimax(prob, stage + 1, x + o.displacement);
    best = std::max(best, exp_val);
  }
  return best;
}

}  // namespace levydpp
