#include <gtest/gtest.h>

#include "levydpp/control.hpp"

namespace levydpp {
namespace {

struct HistoryFixture {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> left_states;
  std::vector<JumpEvent> events;

  HistoryView view() const {
    return HistoryView{times, states, left_states, events, 1};
  }
};

HistoryFixture simple_history() {
  HistoryFixture h;
  h.times = {0.0, 0.25, 0.5, 0.75, 1.0};
  h.states = {0.0, 1.0, 2.0, 3.0, 4.0};
  h.left_states = {0.0, 0.5, 1.5, 2.5, 3.5};
  return h;
}

TEST(ActionSetTest, BoxGridAndMembership) {
  const auto A = ActionSet::box({-1.0}, {1.0}, 3);
  ASSERT_EQ(A.actions.size(), 3u);
  EXPECT_EQ(A.actions[0], Vec{-1.0});
  EXPECT_EQ(A.actions[1], Vec{0.0});
  EXPECT_EQ(A.actions[2], Vec{1.0});
  EXPECT_TRUE(A.contains(Vec{0.0}));
  EXPECT_FALSE(A.contains(Vec{0.5}));
  const auto single = ActionSet::box({-1.0}, {1.0}, 1);
  ASSERT_EQ(single.actions.size(), 1u);
  EXPECT_EQ(single.actions[0], Vec{0.0});
  EXPECT_THROW(ActionSet::finite_grid({}), std::invalid_argument);
  EXPECT_THROW(ActionSet::box({-1.0}, {1.0}, 0), std::invalid_argument);
  EXPECT_THROW(ActionSet::box({0.0, 0.0}, {1.0, 1.0}, 100), BudgetError);
}

TEST(PolicyTest, ConstantEverywhere) {
  const auto h = simple_history();
  const auto p = ControlPolicy::constant({0.7});
  EXPECT_EQ(evaluate(p, 0.0, h.view()), Vec{0.7});
  EXPECT_EQ(evaluate(p, 1.0, h.view()), Vec{0.7});
  EXPECT_EQ(action_for_interval(p, h.view()), Vec{0.7});
}

TEST(PolicyTest, PiecewiseSwitchesStrictlyAfterBreak) {
  const auto h = simple_history();
  const auto p = ControlPolicy::piecewise({0.5}, {Vec{1.0}, Vec{2.0}});
  EXPECT_EQ(evaluate(p, 0.0, h.view()), Vec{1.0});
  EXPECT_EQ(evaluate(p, 0.5, h.view()), Vec{1.0});
  EXPECT_EQ(evaluate(p, 0.75, h.view()), Vec{2.0});
  EXPECT_EQ(evaluate(p, 1.0, h.view()), Vec{2.0});
  EXPECT_THROW(evaluate(p, -0.1, h.view()), std::invalid_argument);
  EXPECT_THROW(evaluate(p, 1.5, h.view()), std::invalid_argument);
  EXPECT_THROW(ControlPolicy::piecewise({0.5}, {Vec{1.0}}), std::invalid_argument);
  EXPECT_THROW(ControlPolicy::piecewise({0.5, 0.25}, {Vec{1.0}, Vec{2.0}, Vec{3.0}}),
               std::invalid_argument);
}

TEST(PolicyTest, IntervalProtocolUsesBreakInclusively) {
  HistoryFixture h = simple_history();
  const auto p = ControlPolicy::piecewise({0.5}, {Vec{1.0}, Vec{2.0}});
  h.times = {0.0, 0.25};
  h.states = {0.0, 1.0};
  h.left_states = {0.0, 0.5};
  EXPECT_EQ(action_for_interval(p, h.view()), Vec{1.0});
  h.times = {0.0, 0.25, 0.5};
  h.states = {0.0, 1.0, 2.0};
  h.left_states = {0.0, 0.5, 1.5};
  EXPECT_EQ(action_for_interval(p, h.view()), Vec{2.0});
}

TEST(PolicyTest, LatticeFeedbackReadsLeftLimit) {
  LatticeFeedbackPolicy lf;
  lf.breaks = {};
  lf.cell_lower = 0.0;
  lf.cell_width = 1.0;
  lf.n_cells = 4;
  lf.cells_per_segment = {4};
  lf.actions = {Vec{10.0}, Vec{11.0}, Vec{12.0}, Vec{13.0}};
  const auto p = ControlPolicy::lattice_feedback(lf);

  const auto h = simple_history();
  // Grid point: the stored left limit decides the cell.
  EXPECT_EQ(evaluate(p, 0.5, h.view()), Vec{11.0});   // left limit 1.5 -> cell 1
  EXPECT_EQ(evaluate(p, 1.0, h.view()), Vec{13.0});   // left limit 3.5 -> cell 3
  // Off-grid time: falls back to the state at the last earlier grid point.
  EXPECT_EQ(evaluate(p, 0.6, h.view()), Vec{12.0});   // state(0.5) = 2.0 -> cell 2
  // Interval protocol reads the post-jump state at the window end.
  EXPECT_EQ(action_for_interval(p, h.view()), Vec{13.0});  // state 4.0 clamps to cell 3
}

TEST(PolicyTest, LatticeClampsOutOfRangeCells) {
  LatticeFeedbackPolicy lf;
  lf.cell_lower = 0.0;
  lf.cell_width = 1.0;
  lf.n_cells = 2;
  lf.cells_per_segment = {2};
  lf.actions = {Vec{0.0}, Vec{1.0}};
  EXPECT_EQ(lf.cell_of(-5.0), 0);
  EXPECT_EQ(lf.cell_of(0.5), 0);
  EXPECT_EQ(lf.cell_of(1.5), 1);
  EXPECT_EQ(lf.cell_of(99.0), 1);
}

TEST(PolicyTest, ConcatenateSwitchesAtStoppingTime) {
  HistoryFixture h = simple_history();
  h.events = {JumpEvent{0.5, Vec{3.0}}};
  const auto p = concatenate(ControlPolicy::constant({1.0}), ControlPolicy::constant({2.0}),
                             StoppingRule::first_jump());
  // Instantaneous evaluation switches strictly after tau.
  EXPECT_EQ(evaluate(p, 0.5, h.view()), Vec{1.0});
  EXPECT_EQ(evaluate(p, 0.75, h.view()), Vec{2.0});
  // Interval protocol switches on the interval starting at tau.
  HistoryFixture upto = h;
  upto.times = {0.0, 0.25, 0.5};
  upto.states = {0.0, 1.0, 2.0};
  upto.left_states = {0.0, 0.5, 1.5};
  EXPECT_EQ(action_for_interval(p, upto.view()), Vec{2.0});
  HistoryFixture before = h;
  before.times = {0.0, 0.25};
  before.states = {0.0, 1.0};
  before.left_states = {0.0, 0.5};
  before.events = {};
  EXPECT_EQ(action_for_interval(p, before.view()), Vec{1.0});
}

TEST(StoppingRuleTest, RulesResolveAgainstWindow) {
  HistoryFixture h = simple_history();
  h.events = {JumpEvent{0.25, Vec{0.5}}, JumpEvent{0.6, Vec{2.0}}};
  EXPECT_EQ(stop_time_so_far(StoppingRule::at(0.4), h.view()), 0.4);
  EXPECT_EQ(stop_time_so_far(StoppingRule::first_jump(), h.view()), 0.25);
  EXPECT_EQ(stop_time_so_far(StoppingRule::first_exceed(1.0), h.view()), 0.6);
  EXPECT_TRUE(never_exceeds(stop_time_so_far(StoppingRule::first_exceed(5.0), h.view())));
  // States are 0,1,2,3,4 at the grid times; first norm >= 2.5 is at t=0.75.
  EXPECT_EQ(stop_time_so_far(StoppingRule::first_exit_ball(2.5), h.view()), 0.75);
  EXPECT_TRUE(never_exceeds(stop_time_so_far(StoppingRule::first_exit_ball(10.0), h.view())));
}

TEST(StoppingRuleTest, StopTimeCapsAtHorizon) {
  HistoryFixture h = simple_history();
  h.events = {JumpEvent{0.6, Vec{2.0}}};
  EXPECT_EQ(stop_time(StoppingRule::first_jump(), h.view(), 1.0), 0.6);
  EXPECT_EQ(stop_time(StoppingRule::first_exceed(5.0), h.view(), 1.0), 1.0);
  EXPECT_EQ(stop_time(StoppingRule::at(3.0), h.view(), 1.0), 1.0);
}

TEST(EnumerateTest, FamilySizesAndCap) {
  const auto A = ActionSet::finite_grid({Vec{-1.0}, Vec{1.0}});
  EXPECT_EQ(enumerate_policies(A, {}, std::nullopt).size(), 2u);
  EXPECT_EQ(enumerate_policies(A, {0.5}, std::nullopt).size(), 4u);
  LatticeSpec lat;
  lat.n_cells = 3;
  lat.from_segment = 1;
  // Slots: segment 0 open-loop (1) + segment 1 lattice (3) = 4 -> 2^4 policies.
  EXPECT_EQ(enumerate_policies(A, {0.5}, lat).size(), 16u);
  EXPECT_THROW(enumerate_policies(A, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95,
                                      0.96, 0.97, 0.98},
                                  std::nullopt),
               BudgetError);
  EXPECT_THROW(enumerate_policies(A, {0.5, 0.25}, std::nullopt), std::invalid_argument);
}

TEST(EnumerateTest, BreakpointsCollectedFromAllLayers) {
  const auto first = ControlPolicy::piecewise({0.25}, {Vec{0.0}, Vec{1.0}});
  const auto second = ControlPolicy::piecewise({0.75}, {Vec{2.0}, Vec{3.0}});
  const auto p = concatenate(first, second, StoppingRule::at(0.5));
  const auto b = breakpoints(p);
  EXPECT_EQ(b, (std::vector<double>{0.25, 0.5, 0.75}));
}

}  // namespace
}  // namespace levydpp
