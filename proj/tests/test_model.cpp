#include "hocp/model.hpp"
#include "hocp/problems.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <set>
#include <tuple>

using namespace hocp;
using namespace hocp::test;

namespace {

bool has_issue(const ValidationReport& r, std::string_view path) {
  for (const auto& i : r) {
    if (i.path == path) return true;
  }
  return false;
}

std::size_t transition_named(const HybridModel& m, std::string_view event) {
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    if (m.transitions[i].event == event) return i;
  }
  throw std::out_of_range(std::string(event));
}

}  // namespace

TEST(Validate, BuiltinsAreClean) {
  for (const auto& name : builtin_names()) {
    const ValidationReport r = validate(builtin(name).model);
    EXPECT_TRUE(r.empty()) << name << ": " << (r.empty() ? "" : r.front().path + " " + r.front().message);
  }
}

TEST(Validate, JumpDimensionMismatch) {
  HybridModel m = ev_transmission().model;
  const std::size_t k = transition_named(m, "s24");
  m.transitions[k].jump.pop_back();
  const ValidationReport r = validate(m);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].path, "transitions[" + std::to_string(k) + "].xi");
}

TEST(Validate, AutonomousNeedsManifold) {
  HybridModel m = ev_transmission().model;
  const std::size_t k = transition_named(m, "s12");
  m.transitions[k].manifold.reset();
  EXPECT_TRUE(has_issue(validate(m), "transitions[" + std::to_string(k) + "].m"));
}

TEST(Validate, ControlledMustNotCarryManifold) {
  HybridModel m = ramp_model();
  m.transitions[1].manifold = state_expr("x1", 1);
  EXPECT_TRUE(has_issue(validate(m), "transitions[1].m"));
}

TEST(Validate, TimeRequiresFlag) {
  HybridModel m = moving_manifold_model();
  EXPECT_TRUE(validate(m).empty());
  m.time_varying = false;
  const ValidationReport r = validate(m);
  EXPECT_TRUE(has_issue(r, "transitions[0].m"));
  EXPECT_TRUE(has_issue(r, "transitions[0].c"));
}

TEST(Validate, StructuralErrors) {
  HybridModel m = ramp_model();
  m.locations[1].id = "q1";
  m.transitions[0].to = "nowhere";
  m.locations[0].control_box[0] = {1.0, -1.0};
  m.locations[2].field.push_back(loc_expr("0", 1, 1));
  m.locations[0].running_cost = parse("x2", location_vars(2, 1));
  const ValidationReport r = validate(m);
  EXPECT_TRUE(has_issue(r, "locations[1].id"));
  EXPECT_TRUE(has_issue(r, "transitions[0].to"));
  EXPECT_TRUE(has_issue(r, "locations[0].control_box[0]"));
  EXPECT_TRUE(has_issue(r, "locations[2].f"));
  EXPECT_TRUE(has_issue(r, "locations[0].l"));
}

TEST(Validate, Idempotent) {
  HybridModel m = ramp_model();
  m.transitions[0].jump.clear();
  const ValidationReport a = validate(m), b = validate(m);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].path, b[i].path);
    EXPECT_EQ(a[i].message, b[i].message);
  }
}

TEST(Schedule, Examples) {
  const HybridModel m = ev_transmission().model;
  using K = SwitchKind;
  EXPECT_TRUE(schedule_check(m, {{"q1", "q2", "q4", "q6"}, {K::autonomous, K::controlled, K::autonomous}}));
  EXPECT_TRUE(schedule_check(m, {{"q1"}, {}}));
  EXPECT_FALSE(schedule_check(m, {{"q1", "q2"}, {K::controlled}}));
  EXPECT_FALSE(schedule_check(m, {{"q1", "q6"}, {K::autonomous}}));
  EXPECT_THROW(schedule_check(m, {{"q1", "q9"}, {K::autonomous}}), std::invalid_argument);
  EXPECT_THROW(schedule_check(m, {{"q1", "q2"}, {}}), std::invalid_argument);
  const auto ks = schedule_transitions(m, {{"q1", "q2", "q4", "q6"}, {K::autonomous, K::controlled, K::autonomous}});
  ASSERT_EQ(ks.size(), 3u);
  EXPECT_EQ(m.transitions[ks[0]].event, "s12");
  EXPECT_EQ(m.transitions[ks[1]].event, "s24");
  EXPECT_EQ(m.transitions[ks[2]].event, "s46");
}

TEST(Schedule, AgreesWithPathEnumeration) {
  const HybridModel m = ev_transmission().model;
  std::set<std::tuple<std::string, std::string, SwitchKind>> edges;
  for (const auto& t : m.transitions) edges.insert({t.from, t.to, t.kind});
  std::vector<std::string> ids;
  for (const auto& l : m.locations) ids.push_back(l.id);

  std::size_t feasible = 0, total = 0;
  // every location word of length 1..4 and every kinds word
  for (std::size_t len = 1; len <= 4; ++len) {
    std::size_t words = 1;
    for (std::size_t i = 0; i < len; ++i) words *= ids.size();
    for (std::size_t w = 0; w < words; ++w) {
      LocationSchedule s;
      std::size_t c = w;
      for (std::size_t i = 0; i < len; ++i, c /= ids.size()) s.locations.push_back(ids[c % ids.size()]);
      for (std::size_t kw = 0; kw < (1u << (len - 1)); ++kw) {
        s.kinds.clear();
        bool want = true;
        for (std::size_t j = 0; j + 1 < len; ++j) {
          const SwitchKind k = (kw >> j) & 1u ? SwitchKind::controlled : SwitchKind::autonomous;
          s.kinds.push_back(k);
          want = want && edges.contains({s.locations[j], s.locations[j + 1], k});
        }
        EXPECT_EQ(schedule_check(m, s), want);
        feasible += want;
        ++total;
      }
    }
  }
  EXPECT_GT(feasible, 0u);
  EXPECT_LT(feasible, total);
}

TEST(Compiled, EvaluatesModelFunctions) {
  const CompiledModel cm(ramp_model());
  Eigen::VectorXd f;
  cm.field(2, vec({2.0}), vec({0.5}), 0.0, f);
  EXPECT_DOUBLE_EQ(f(0), -1.5);
  EXPECT_DOUBLE_EQ(cm.running_cost(1, vec({2.0}), vec({1.0}), 0.0), 0.7);
  EXPECT_DOUBLE_EQ(cm.jump(0, vec({1.5}), 0.0)(0), 3.0);
  EXPECT_DOUBLE_EQ(cm.switching_cost(0, vec({2.0}), 0.0), 0.4);
  EXPECT_DOUBLE_EQ(cm.manifold(0, vec({1.5}), 0.0), 0.5);
  EXPECT_DOUBLE_EQ(cm.manifold_grad(0, vec({1.5}), 0.0)(0), 1.0);
  EXPECT_DOUBLE_EQ(cm.terminal(vec({3.0}), 0.0), 2.0);

  const CompiledModel mm(moving_manifold_model());
  EXPECT_DOUBLE_EQ(mm.manifold_dt(0, vec({0.0}), 0.7), -1.0);
  EXPECT_DOUBLE_EQ(mm.switching_cost(0, vec({0.0}), 0.7), 0.7);
}

TEST(Layout, Names) {
  EXPECT_EQ(state_var(0), "x1");
  EXPECT_EQ(control_var(2), "u3");
  EXPECT_EQ(adjoint_var(1), "lam2");
  EXPECT_EQ(location_layout(2, 1), (std::vector<std::string>{"x1", "x2", "u1", "t", "lam1", "lam2"}));
  EXPECT_EQ(state_layout(1), (std::vector<std::string>{"x1", "t"}));
}
