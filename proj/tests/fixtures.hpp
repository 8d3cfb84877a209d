#pragma once

#include "hocp/model.hpp"
#include "hocp/simulate.hpp"

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace hocp::test {

inline Expr loc_expr(std::string_view s, std::size_t n, std::size_t m) { return parse(s, location_vars(n, m)); }
inline Expr state_expr(std::string_view s, std::size_t n) { return parse(s, state_vars(n)); }

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline ControlLaw constant_law(Eigen::VectorXd u) {
  return [u](std::size_t, double, const Eigen::VectorXd&) { return u; };
}

/// Scalar location with one control in [lo, hi].
inline Location scalar_location(std::string id, std::string_view f, std::string_view l, double lo = -10.0,
                                double hi = 10.0) {
  return Location{std::move(id), 1, 1, {{lo, hi}}, {loc_expr(f, 1, 1)}, loc_expr(l, 1, 1)};
}

/// x1 runs at unit speed toward x2, then restarts from 0 with x2 halved:
/// dwell times w, w/2, w/4, ... accumulate at 2w.
inline HybridModel zeno_model() {
  HybridModel M;
  const std::vector<Interval> box{{-1.0, 1.0}};
  for (const char* id : {"q1", "q2"}) {
    M.locations.push_back(Location{id, 2, 1, box, {loc_expr("1", 2, 1), loc_expr("0", 2, 1)}, loc_expr("0", 2, 1)});
  }
  const std::vector<Expr> jump{state_expr("0", 2), state_expr("0.5*x2", 2)};
  M.transitions = {
      Transition{"a", "q1", "q2", SwitchKind::autonomous, state_expr("x1 - x2", 2), jump, Expr::constant(0.0)},
      Transition{"b", "q2", "q1", SwitchKind::autonomous, state_expr("x1 - x2", 2), jump, Expr::constant(0.0)},
  };
  M.terminal_cost = state_expr("0", 2);
  return M;
}

inline LocationSchedule alternating(std::size_t switches) {
  LocationSchedule s;
  for (std::size_t i = 0; i <= switches; ++i) s.locations.push_back(i % 2 ? "q2" : "q1");
  s.kinds.assign(switches, SwitchKind::autonomous);
  return s;
}

/// x' = 3 (t - 1)^2 from x = 0 meets x - 1 = 0 at t = 1 with zero rate.
inline HybridModel tangential_model() {
  HybridModel M;
  M.time_varying = true;
  M.locations = {scalar_location("q1", "3*(t - 1)^2", "0"), scalar_location("q2", "0", "0")};
  M.transitions = {Transition{"touch", "q1", "q2", SwitchKind::autonomous, state_expr("x1 - 1", 1),
                              {state_expr("x1", 1)}, Expr::constant(0.0)}};
  M.terminal_cost = state_expr("0", 1);
  return M;
}

/// Moving manifold x - t = 0 with a time-dependent switching cost c = t.
inline HybridModel moving_manifold_model() {
  HybridModel M;
  M.time_varying = true;
  M.locations = {scalar_location("q1", "u1", "0.5*u1^2", -2.0, 2.0),
                 scalar_location("q2", "u1", "0.5*u1^2", -2.0, 2.0)};
  M.transitions = {Transition{"cross", "q1", "q2", SwitchKind::autonomous, parse("x1 - t", state_vars(1)),
                              {state_expr("x1", 1)}, parse("t", state_vars(1))}};
  M.terminal_cost = state_expr("0.5*x1^2", 1);
  return M;
}

/// x' = u with an autonomous switch on x = 1 and a controlled one afterwards.
inline HybridModel ramp_model() {
  HybridModel M;
  M.locations = {scalar_location("q1", "u1", "0.5*u1^2", -2.0, 2.0),
                 scalar_location("q2", "u1", "0.5*u1^2 + 0.1*x1", -2.0, 2.0),
                 scalar_location("q3", "-x1 + u1", "0.5*u1^2", -2.0, 2.0)};
  M.transitions = {
      Transition{"up", "q1", "q2", SwitchKind::autonomous, state_expr("x1 - 1", 1), {state_expr("2*x1", 1)},
                 state_expr("0.1*x1^2", 1)},
      Transition{"go", "q2", "q3", SwitchKind::controlled, std::nullopt, {state_expr("x1 - 0.5", 1)},
                 state_expr("0.2", 1)},
  };
  M.terminal_cost = state_expr("0.5*(x1 - 1)^2", 1);
  return M;
}

}  // namespace hocp::test
