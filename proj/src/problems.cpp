#include "hocp/problems.hpp"

#include <stdexcept>

namespace hocp {

namespace {

Expr plain(std::string_view src, const VarSet& vars) { return parse(src, vars); }

class ParamParser {
 public:
  explicit ParamParser(const ParameterTable& p) : p_(p) {
    for (const auto& [k, v] : p_) repl_.emplace(k, Expr::constant(v));
  }

  Expr loc(std::string_view src, std::size_t n, std::size_t m) const { return bind(src, location_vars(n, m)); }
  Expr state(std::string_view src, std::size_t n) const { return bind(src, state_vars(n)); }

 private:
  Expr bind(std::string_view src, VarSet vars) const {
    for (const auto& [k, v] : p_) vars.insert(k);
    return substitute(parse(src, vars), repl_);
  }
  const ParameterTable& p_;
  std::map<std::string, Expr, std::less<>> repl_;
};

Transition autonomous(std::string event, std::string from, std::string to, Expr m, std::vector<Expr> xi) {
  return Transition{std::move(event), std::move(from), std::move(to), SwitchKind::autonomous, std::move(m),
                    std::move(xi), Expr::constant(0.0)};
}

Transition controlled(std::string event, std::string from, std::string to, std::vector<Expr> xi) {
  return Transition{std::move(event), std::move(from), std::move(to), SwitchKind::controlled, std::nullopt,
                    std::move(xi), Expr::constant(0.0)};
}

}  // namespace

ProblemSpec analytic_example() {
  const VarSet lv = location_vars(1, 1), sv = state_vars(1);
  const std::vector<Interval> box{{-10.0, 10.0}};
  ProblemSpec p;
  p.name = "analytic";
  p.model.locations = {
      Location{"q1", 1, 1, box, {plain("x1 + x1*u1", lv)}, plain("0.5*u1^2", lv)},
      Location{"q2", 1, 1, box, {plain("-x1 + x1*u1", lv)}, plain("0.5*u1^2", lv)},
  };
  p.model.transitions = {Transition{"s12", "q1", "q2", SwitchKind::controlled, std::nullopt, {plain("-x1", sv)},
                                    plain("1/(1 + x1^2)", sv)}};
  p.model.terminal_cost = plain("0.5*x1^2", sv);
  p.schedule = {{"q1", "q2"}, {SwitchKind::controlled}};
  p.h0 = {"q1", Eigen::VectorXd::Constant(1, 0.5)};
  p.t0 = 0.0;
  p.tf = 4.0;
  return p;
}

ParameterTable ev_default_parameters() {
  return {
      // fixed gear 1: torque limited (q1) and power limited (q2)
      {"A1", 0.02}, {"B1", 2.0}, {"C1", 0.05}, {"D1", 0.05}, {"k1", 1.0},
      {"A2", 0.02}, {"B2", 2.0}, {"C2", 0.05}, {"D2", 0.05},
      // fixed gear 2
      {"A5", 0.02}, {"B5", 2.0}, {"C5", 0.05}, {"D5", 0.05}, {"k3", 0.05},
      {"A6", 0.02}, {"B6", 2.0}, {"C6", 0.05}, {"D6", 0.05},
      // gear shift, shared damping and load
      {"ASS", 0.2}, {"ASR", 0.1}, {"ASA", 0.01}, {"ARS", 0.1}, {"ARR", 0.2}, {"ARA", 0.01},
      {"DSL", 0.05}, {"DRL", 0.05}, {"k2", 100.0},
      // input gains, torque limited shift (q3) and power limited shift (q4)
      {"B3SM", 1.0}, {"B3RM", 1.0}, {"B3SS", 3.0}, {"B3RS", 2.0}, {"B3SR", 1.0}, {"B3RR", 1.0},
      {"BSM", 1.0}, {"BRM", 1.0}, {"BSS", 3.0}, {"BRS", 2.0}, {"BSR", 1.0}, {"BRR", 1.0},
      {"R1", 0.6}, {"R2", 1.0}, {"gtr1", 1.0}, {"gtr2", 0.6},
      // power consumption
      {"a1", 0.3}, {"b1", 1.0}, {"c1", 0.05}, {"d1", 0.02},
      {"a2", 0.3}, {"b2", 1.0}, {"c2", 0.05}, {"d2", 0.10},
      {"a3", 0.3}, {"b3", 1.0}, {"c3", 0.05}, {"d3", 0.05},
      {"a4", 0.3}, {"b4", 1.0}, {"c4", 0.05}, {"d4", 0.05},
      {"a5", 0.3}, {"b5", 1.0}, {"c5", 0.05}, {"d5", 0.02},
      {"a6", 0.3}, {"b6", 1.0}, {"c6", 0.05}, {"d6", 0.02},
      // terminal cost g0 + g1 x + g2 x^2
      {"g0", 18.0}, {"g1", -12.0}, {"g2", 2.0},
      {"tf", 4.0},
  };
}

ProblemSpec ev_transmission(const ParameterTable& params) {
  const ParameterTable defaults = ev_default_parameters();
  for (const auto& [k, v] : defaults) {
    if (!params.contains(k)) throw std::invalid_argument("missing EV parameter '" + k + "'");
  }
  for (const auto& [k, v] : params) {
    if (!defaults.contains(k)) throw std::invalid_argument("unknown EV parameter '" + k + "'");
  }
  ParameterTable P = params;
  const double tf = P.at("tf");
  P.erase("tf");
  const ParamParser pp(P);

  const std::vector<Interval> box1{{-1.0, 1.0}};
  // gear-shift clutch inputs only act in one direction
  const std::vector<Interval> box3{{-1.0, 1.0}, {-1.0, 0.0}, {-1.0, 0.0}};

  ProblemSpec p;
  p.name = "ev";
  auto& M = p.model;
  M.locations = {
      Location{"q1", 1, 1, box1, {pp.loc("-A1*x1^2 + B1*u1 - C1*x1 - D1", 1, 1)},
               pp.loc("a1*u1^2 + b1*x1*u1 + c1*u1 + d1*x1", 1, 1)},
      Location{"q2", 1, 1, box1, {pp.loc("-A2*x1^2 + B2*u1/x1 - C2*x1 - D2", 1, 1)},
               pp.loc("a2*u1^2/x1^2 + b2*u1 + c2*u1/x1 + d2*x1", 1, 1)},
      Location{"q3", 2, 3, box3,
               {pp.loc("-ASS*x1 + ASR*x2 - ASA*(x1 + R2*x2)^2 + B3SM*u1 + B3SS*u2 - B3SR*u3 - DSL", 2, 3),
                pp.loc("ARS*x1 - ARR*x2 - ARA*(x1 + R2*x2)^2 + B3RM*u1 - B3RS*u2 - B3RR*u3 - DRL", 2, 3)},
               pp.loc("a3*u1^2 + b3*(x1 + R1*x2)*u1 + c3*u1 + d3*(x1 + R1*x2)", 2, 3)},
      Location{"q4", 2, 3, box3,
               {pp.loc("-ASS*x1 + ASR*x2 - ASA*(x1 + R2*x2)^2 + BSM*u1/(x1 + R1*x2) + BSS*u2 - BSR*u3 - DSL", 2, 3),
                pp.loc("ARS*x1 - ARR*x2 - ARA*(x1 + R2*x2)^2 + BRM*(1 + R1)*u1/(x1 + R1*x2) - BRS*u2 + BRR*u3 - DRL",
                       2, 3)},
               pp.loc("a4*u1^2/(x1 + R1*x2)^2 + b4*u1 + c4*u1/(x1 + R1*x2) + d4*(x1 + R1*x2)", 2, 3)},
      Location{"q5", 1, 1, box1, {pp.loc("-A5*x1^2 + B5*u1 - C5*x1 - D5", 1, 1)},
               pp.loc("a5*u1^2 + b5*x1*u1 + c5*u1 + d5*x1", 1, 1)},
      Location{"q6", 1, 1, box1, {pp.loc("-A6*x1^2 + B6*u1/x1 - C6*x1 - D6", 1, 1)},
               pp.loc("a6*u1^2/x1^2 + b6*u1 + c6*u1/x1 + d6*x1", 1, 1)},
  };
  const Expr id1 = pp.state("x1", 1);
  const Expr id2a = pp.state("x1", 2), id2b = pp.state("x2", 2);
  M.transitions = {
      autonomous("s12", "q1", "q2", pp.state("x1 - k1", 1), {id1}),
      autonomous("s21", "q2", "q1", pp.state("x1 - k1", 1), {id1}),
      controlled("s13", "q1", "q3", {pp.state("gtr1*x1", 1), pp.state("0", 1)}),
      controlled("s24", "q2", "q4", {pp.state("gtr1*x1", 1), pp.state("0", 1)}),
      autonomous("s31", "q3", "q1", pp.state("x2", 2), {pp.state("x1/gtr1", 2)}),
      autonomous("s42", "q4", "q2", pp.state("x2", 2), {pp.state("x1/gtr1", 2)}),
      autonomous("s34", "q3", "q4", pp.state("x1 + R1*x2 - k2", 2), {id2a, id2b}),
      autonomous("s43", "q4", "q3", pp.state("x1 + R1*x2 - k2", 2), {id2a, id2b}),
      autonomous("s35", "q3", "q5", pp.state("x1", 2), {pp.state("gtr2*x2", 2)}),
      autonomous("s46", "q4", "q6", pp.state("x1", 2), {pp.state("gtr2*x2", 2)}),
      controlled("s53", "q5", "q3", {pp.state("0", 1), pp.state("x1/gtr2", 1)}),
      controlled("s64", "q6", "q4", {pp.state("0", 1), pp.state("x1/gtr2", 1)}),
      autonomous("s56", "q5", "q6", pp.state("x1 - k3", 1), {id1}),
      autonomous("s65", "q6", "q5", pp.state("x1 - k3", 1), {id1}),
  };
  M.terminal_cost = pp.state("g0 + g1*x1 + g2*x1^2", 1);
  p.schedule = {{"q1", "q2", "q4", "q6"},
                {SwitchKind::autonomous, SwitchKind::controlled, SwitchKind::autonomous}};
  p.h0 = {"q1", Eigen::VectorXd::Zero(1)};
  p.t0 = 0.0;
  p.tf = tf;
  return p;
}

ProblemSpec lq_toy() {
  const VarSet lv = location_vars(1, 1), sv = state_vars(1);
  ProblemSpec p;
  p.name = "lq";
  p.model.locations = {Location{"q1", 1, 1, {{-2.0, 2.0}}, {plain("u1", lv)}, plain("0.5*u1^2", lv)}};
  p.model.terminal_cost = plain("0.5*x1^2", sv);
  p.schedule = {{"q1"}, {}};
  p.h0 = {"q1", Eigen::VectorXd::Ones(1)};
  p.t0 = 0.0;
  p.tf = 1.0;
  p.references = {{"J", 0.25, "closed-form two-point boundary value solution"},
                  {"lambda", 0.5, "closed-form two-point boundary value solution"}};
  return p;
}

std::vector<std::string> builtin_names() { return {"analytic", "ev", "lq"}; }

ProblemSpec builtin(std::string_view name) {
  if (name == "analytic") return analytic_example();
  if (name == "ev") return ev_transmission();
  if (name == "lq") return lq_toy();
  throw std::invalid_argument("unknown builtin '" + std::string(name) + "'");
}

}  // namespace hocp
