// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "hocp/expr.hpp"
#include "hocp/hmp.hpp"
#include "hocp/oracle.hpp"
#include "hocp/problems.hpp"
#include "hocp/sensitivity.hpp"
#include "hocp/simulate.hpp"
#include "hocp/solver.hpp"

#include "fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hocp;
using namespace hocp::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome_ {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

ShootingProblem assemble_spec(const ProblemSpec& p) { return assemble(p.model, p.schedule, p.h0, p.t0, p.tf); }

OracleResult oracle(const ProblemSpec& p, std::size_t nodes, std::size_t budget) {
  OracleOptions o;
  o.nodes = nodes;
  o.budget = budget;
  o.sim = p.config;
  return optimize(p.model, p.schedule, p.h0, p.t0, p.tf, o);
}

// Solutions shared between criteria.
struct Solved {
  ProblemSpec spec;
  ShootingProblem prob;
  SolveReport report;
  double seconds = 0.0;
};

Solved solve_builtin(const std::string& name, std::size_t starts, std::uint64_t seed) {
  Solved s{builtin(name), {}, {}, 0.0};
  const auto t = Clock::now();
  s.prob = assemble_spec(s.spec);
  const MultistartResult ms = multistart(s.prob, starts, seed);
  if (ms.best) s.report = ms.reports[*ms.best];
  s.seconds = seconds_since(t);
  return s;
}

HybridInput report_input(const Solved& s) {
  HybridInput in;
  in.control = s.report.control;
  for (std::size_t j = 0; j < s.prob.slots.size(); ++j) {
    if (s.prob.slots[j].autonomous) {
      in.switch_times.emplace_back(std::nullopt);
    } else {
      in.switch_times.emplace_back(s.report.switch_times[j]);
    }
  }
  return in;
}

SensitivityContext context_of(const Solved& s) {
  return SensitivityContext(s.prob.working_model(), s.prob.schedule, InitialState{s.prob.h0.q, s.prob.x0},
                            report_input(s), s.prob.t0, s.prob.tf, shooting_sim_config());
}

Eigen::VectorXd random_in_box(const Location& loc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(loc.control_dim));
  for (std::size_t c = 0; c < loc.control_dim; ++c) {
    v(static_cast<Eigen::Index>(c)) = loc.control_box[c].lo + unif(rng) * (loc.control_box[c].hi - loc.control_box[c].lo);
  }
  return v;
}

std::size_t transition_named(const HybridModel& m, std::string_view event) {
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    if (m.transitions[i].event == event) return i;
  }
  return m.transitions.size();
}

// --- criteria --------------------------------------------------------------

Outcome_ lq_sanity(const Solved& lq) {
  Outcome_ o;
  o.require(lq.report.converged, "indirect converged");
  const double Ji = lq.report.cost;
  o.require(std::fabs(Ji - 0.25) <= 1e-6, "|J_indirect - 0.25| <= 1e-6");
  o.require(lq.seconds < 5.0, "indirect runtime < 5 s");
  const auto t = Clock::now();
  const OracleResult r = oracle(lq_toy(), 9, 10000);
  const double to = seconds_since(t);
  o.require(std::fabs(r.cost - 0.25) <= 1e-3, "|J_oracle - 0.25| <= 1e-3");
  o.require(to < 5.0, "oracle runtime < 5 s");
  o.detail << "J_indirect=" << Ji << " (" << lq.seconds << " s), J_oracle=" << r.cost << " (" << to << " s)";
  return o;
}

Outcome_ analytic_example_check(const Solved& an) {
  Outcome_ o;
  const auto t = Clock::now();
  const SolveReport& r = an.report;
  o.require(r.converged && r.feasible, "converged feasible extremal");
  if (!r.converged) return o;
  double worst = 0.0;
  for (const auto& row : r.residuals) worst = std::max(worst, std::fabs(row.value));
  o.require(worst <= 1e-8, "residuals <= 1e-8");

  // x (lam- - lam+) = x^2 / 2 ((lam-)^2 - (lam+)^2) at the switch
  const double x = r.trajectory.jumps[0].x_minus(0);
  const double lm = r.adjoint.switches[0].lam_minus(0), lp = r.adjoint.switches[0].lam_plus(0);
  const double cont = std::fabs(x * (lm - lp) - 0.5 * x * x * (lm * lm - lp * lp));
  o.require(cont <= 1e-7, "continuity relation <= 1e-7");

  // H(t) along the extremal
  const auto& hs = *an.prob.hs;
  double H0 = std::nan(""), drift = 0.0;
  for (std::size_t i = 0; i < r.trajectory.segments.size(); ++i) {
    const Segment& s = r.trajectory.segments[i];
    for (double tt : s.x.mesh()) {
      const Eigen::VectorXd xx = s.x(tt);
      const double H = hs.value(s.loc, xx, r.control(i, tt, xx), r.adjoint.at(i, tt), tt);
      if (std::isnan(H0)) H0 = H;
      drift = std::max(drift, std::fabs(H - H0));
    }
  }
  const double rel = drift / std::fabs(H0);
  o.require(rel <= 1e-5, "H constant to 1e-5 relative");

  const OracleResult d = oracle(analytic_example(), 21, 20000);
  o.require(refine_check(r.cost, d.cost, 5e-3), "J_indirect <= J_oracle (1 + 5e-3)");
  const double total = an.seconds + seconds_since(t);
  o.require(total < 60.0, "runtime < 60 s");
  o.detail << "J=" << r.cost << " t_s=" << r.switch_times[0] << " residual=" << worst << " continuity=" << cont
           << " H drift (rel)=" << rel << " J_oracle=" << d.cost << " (" << total << " s)";
  return o;
}

// lam(t) against central differences of the cost-to-go under the fixed open-loop control.
double adjoint_gradient_error(const Solved& s, std::size_t& checks) {
  const SolveReport& r = s.report;
  const CompiledModel& cm = s.prob.hs->compiled();
  const auto& sched = s.prob.schedule;
  double worst = 0.0;
  for (std::size_t i = 0; i < r.trajectory.segments.size(); ++i) {
    const Segment& seg = r.trajectory.segments[i];
    for (int k = 1; k <= 5; ++k) {
      const double t = seg.t_begin + (seg.t_end - seg.t_begin) * k / 6.0;
      LocationSchedule tail;
      tail.locations.assign(sched.locations.begin() + static_cast<long>(i), sched.locations.end());
      tail.kinds.assign(sched.kinds.begin() + static_cast<long>(i), sched.kinds.end());
      HybridInput in;
      in.control = r.control;
      in.segment_offset = i;
      for (std::size_t j = i; j < r.switch_times.size(); ++j) in.switch_times.emplace_back(r.switch_times[j]);
      const Eigen::VectorXd x = seg.x(t);
      const Eigen::VectorXd lam = r.adjoint.at(i, t);
      for (Eigen::Index c = 0; c < x.size(); ++c) {
        const double h = 1e-5 * (1.0 + std::fabs(x(c)));
        auto cost_to_go = [&](double dx) {
          Eigen::VectorXd xp = x;
          xp(c) += dx;
          const HybridTrajectory tr = run(cm, tail, {seg.location, xp}, in, t, s.prob.tf, shooting_sim_config());
          return cost_of(cm, tr, r.control);
        };
        const double fd = (cost_to_go(h) - cost_to_go(-h)) / (2.0 * h);
        worst = std::max(worst, std::fabs(fd - lam(c)) / std::max(std::fabs(lam(c)), 1e-12));
        ++checks;
      }
    }
  }
  return worst;
}

Outcome_ adjoint_is_gradient(const Solved& lq, const Solved& an) {
  Outcome_ o;
  o.require(lq.report.converged && an.report.converged, "solutions available");
  if (!o.pass) return o;
  std::size_t n = 0;
  const double e_lq = adjoint_gradient_error(lq, n);
  const double e_an = adjoint_gradient_error(an, n);
  o.require(e_lq <= 1e-3, "LQ lam matches FD to 1e-3 relative");
  o.require(e_an <= 1e-3, "analytic lam matches FD to 1e-3 relative");
  o.detail << n << " checks, worst relative error LQ=" << e_lq << " analytic=" << e_an;
  return o;
}

struct NeedleStats {
  double worst_decrease = 0.0;  // max of -dJ / (1 + |J|)
  double worst_fd = 0.0;        // max |fd - dJ| / eps over the cross-checks
  double worst_duality = 0.0;   // max deviation / (1 + scale)
  std::size_t needles = 0;
};

NeedleStats needles(const Solved& s, std::size_t count, std::size_t fd_every, std::uint64_t seed) {
  NeedleStats st;
  const SensitivityContext ctx = context_of(s);
  const double J = ctx.cost();
  const auto& segs = ctx.trajectory().segments;
  const auto& M = s.prob.working_model();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double eps = 1e-4;
  while (st.needles < count) {
    const double t = s.prob.t0 + unif(rng) * (s.prob.tf - s.prob.t0);
    const std::size_t i = ctx.trajectory().segment_at(t);
    if (!(t > segs[i].t_begin + 2.0 * eps && t < segs[i].t_end - 2.0 * eps)) continue;
    const Eigen::VectorXd v = random_in_box(M.locations[segs[i].loc], rng);
    const VariationRecord rec = propagate_variation(ctx, t, v);
    const double d = first_order_cost_change(ctx, rec);
    st.worst_decrease = std::max(st.worst_decrease, -d / (1.0 + std::fabs(J)));
    const DualityAudit a = duality_audit(ctx, ctx.adjoint(), rec);
    st.worst_duality = std::max(st.worst_duality, a.deviation / (1.0 + a.scale));
    if (st.needles % fd_every == 0) {
      const double fd = (ctx.needle_cost(t, v, eps) - J) / eps;
      st.worst_fd = std::max(st.worst_fd, std::fabs(fd - d) / eps);
    }
    ++st.needles;
  }
  return st;
}

Outcome_ needle_nonnegativity(const std::vector<const Solved*>& sols, std::vector<NeedleStats>& stats) {
  Outcome_ o;
  for (const Solved* s : sols) {
    if (!s->report.converged) {
      o.require(false, s->spec.name + " solution available");
      stats.emplace_back();
      continue;
    }
    const NeedleStats st = needles(*s, 100, 10, 1);
    stats.push_back(st);
    o.require(st.worst_decrease <= 1e-4, s->spec.name + " dJ/deps >= -1e-4 (1 + |J|)");
    // O(eps): the second-order remainder per unit eps stays bounded
    o.require(st.worst_fd <= 100.0, s->spec.name + " finite-eps cross-check within O(eps)");
    o.detail << s->spec.name << ": decrease=" << st.worst_decrease << " |fd-dJ|/eps=" << st.worst_fd << "; ";
  }
  return o;
}

Outcome_ duality(const std::vector<const Solved*>& sols, const std::vector<NeedleStats>& stats) {
  Outcome_ o;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    o.require(stats[k].needles > 0, sols[k]->spec.name + " audited");
    o.require(stats[k].worst_duality <= 1e-6, sols[k]->spec.name + " deviation <= 1e-6 (1 + scale)");
    o.detail << sols[k]->spec.name << "=" << stats[k].worst_duality << " ";
  }
  return o;
}

Outcome_ ev_transmission_check(const Solved& ev) {
  Outcome_ o;
  const SolveReport& r = ev.report;
  o.require(r.converged && r.feasible, "multistart(16) converged to a feasible extremal");
  o.require(ev.prob.size() == 10 && ev.prob.residual_names.size() == 10, "10 unknowns / 10 residuals");
  o.require(ev.seconds < 300.0, "runtime < 5 min");
  if (!r.converged) {
    o.detail << "(" << ev.seconds << " s)";
    return o;
  }
  double worst = 0.0;
  for (const auto& row : r.residuals) worst = std::max(worst, std::fabs(row.value));
  o.require(worst <= 1e-6, "residuals <= 1e-6");

  std::vector<Eigen::Index> dims;
  for (const auto& s : r.adjoint.segments) dims.push_back(static_cast<Eigen::Index>(s.lam.dim()));
  o.require(dims == std::vector<Eigen::Index>{1, 1, 2, 1}, "adjoint dimensions 1, 1, 2, 1");

  const auto P = ev_default_parameters();
  const auto& s2 = r.adjoint.switches[1];
  const auto& s3 = r.adjoint.switches[2];
  const double bc2 = std::fabs(s2.lam_minus(0) - P.at("gtr1") * s2.lam_plus(0));
  const double bc3 = std::max(std::fabs(s3.lam_minus(0) - s3.p), std::fabs(s3.lam_minus(1) - P.at("gtr2") * s3.lam_plus(0)));
  o.require(bc2 <= 1e-6, "lam_q2 = gtr1 lam_q4(1)+ at t_s2");
  o.require(bc3 <= 1e-6, "lam_q4 = [0; gtr2] lam_q6+ + p [1; 0] at t_s3");

  // clutch inputs against the signs of their switching functions
  std::size_t total = 0, agree = 0;
  const Segment& q4 = r.trajectory.segments[2];
  for (double t : q4.x.mesh()) {
    const Eigen::VectorXd x = q4.x(t);
    const Eigen::VectorXd lam = r.adjoint.at(2, t);
    const Eigen::VectorXd u = r.control(2, t, x);
    const double sw2 = lam(0) * P.at("BSS") - lam(1) * P.at("BRS");
    const double sw3 = -lam(0) * P.at("BSR") + lam(1) * P.at("BRR");
    for (auto [ui, sw] : {std::pair{u(1), sw2}, std::pair{u(2), sw3}}) {
      ++total;
      const bool binary = ui == -1.0 || ui == 0.0;
      const bool rule = sw > 0.0 ? ui == -1.0 : (sw < 0.0 ? ui == 0.0 : binary);
      agree += binary && rule;
    }
  }
  const double share = total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
  o.require(share >= 0.99, "u2, u3 in {-1, 0} by the sign rules at >= 99% of mesh points");
  o.detail << "J=" << r.cost << " t_s=" << r.switch_times[0] << "," << r.switch_times[1] << "," << r.switch_times[2]
           << " residual=" << worst << " bc=" << std::max(bc2, bc3) << " sign-rule share=" << share << " ("
           << ev.seconds << " s)";
  return o;
}

Expr random_smooth(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 2);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  auto sub = [&] { return random_smooth(rng, depth - 1); };
  const Expr one = Expr::constant(1.0);
  switch (pick(rng)) {
    case 0:
      return Expr::constant(val(rng));
    case 1:
      return Expr::variable("x");
    case 2:
      return Expr::variable("y");
    case 3:
      return sin(sub());
    case 4:
      return exp(Expr::constant(0.3) * sub());
    case 5:
      return log(one + pow(sub(), Expr::constant(2.0)));
    case 6:
      return sub() * sub();
    case 7:
      return sub() / (one + pow(sub(), Expr::constant(2.0)));
    case 8:
      return sqrt(one + pow(sub(), Expr::constant(2.0)));
    default:
      return sub() - cos(sub());
  }
}

Outcome_ symbolic_gradients() {
  Outcome_ o;
  const auto t = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  double worst = 0.0;
  std::size_t n = 0;
  while (n < 1000) {
    const Expr e = random_smooth(rng, 3);
    const std::string v = n % 2 ? "y" : "x";
    const Expr d = differentiate(e, v);
    Bindings b{{"x", pt(rng)}, {"y", pt(rng)}};
    // Richardson-extrapolated central differences
    auto central = [&](double h) {
      Bindings hi = b, lo = b;
      hi[v] += h;
      lo[v] -= h;
      return (eval(e, hi) - eval(e, lo)) / (2.0 * h);
    };
    const double h = 1e-3;
    const double fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
    const double ex = eval(d, b);
    worst = std::max(worst, std::fabs(ex - fd) / std::max(1.0, std::fabs(ex)));
    ++n;
  }
  const double sec = seconds_since(t);
  o.require(worst <= 1e-6, "relative error <= 1e-6");
  o.require(sec < 5.0, "runtime < 5 s");
  o.detail << n << " checks, worst=" << worst << " (" << sec << " s)";
  return o;
}

Outcome_ simulation_fidelity() {
  Outcome_ o;
  SimConfig cfg;
  const double tol = 10.0 * cfg.event_tol;

  // x' = x from 0.5 reaches 1 at ln 2
  HybridModel g;
  g.locations = {scalar_location("q1", "x1", "0"), scalar_location("q2", "0", "0")};
  g.transitions = {Transition{"hit", "q1", "q2", SwitchKind::autonomous, state_expr("x1 - 1", 1),
                              {state_expr("x1", 1)}, Expr::constant(0.0)}};
  g.terminal_cost = state_expr("0", 1);
  const HybridTrajectory tg = run(CompiledModel(g), {{"q1", "q2"}, {SwitchKind::autonomous}}, {"q1", vec({0.5})},
                                  HybridInput{{std::nullopt}, constant_law(vec({0.0})), {}, 0}, 0.0, 1.0, cfg);
  const double e1 = tg.jumps.empty() ? INFINITY : std::fabs(tg.jumps[0].t - std::log(2.0));

  // moving manifold x = t with x = 1 + t/2 is met at t = 2
  const HybridTrajectory tm =
      run(CompiledModel(moving_manifold_model()), {{"q1", "q2"}, {SwitchKind::autonomous}}, {"q1", vec({1.0})},
          HybridInput{{std::nullopt}, constant_law(vec({0.5})), {}, 0}, 0.0, 3.0, cfg);
  const double e2 = tm.jumps.empty() ? INFINITY : std::fabs(tm.jumps[0].t - 2.0);

  // dwell halving: switches at 2 - 2^-k
  SimConfig zc = cfg;
  zc.max_switches = 12;
  const HybridTrajectory tz =
      run(CompiledModel(zeno_model()), alternating(40), {"q1", vec({0.0, 1.0})},
          HybridInput{std::vector<std::optional<double>>(40), constant_law(vec({0.0})), {}, 0}, 0.0, 3.0, zc);
  double e3 = 0.0;
  for (std::size_t k = 0; k < tz.jumps.size(); ++k) {
    e3 = std::max(e3, std::fabs(tz.jumps[k].t - (2.0 - std::ldexp(1.0, -static_cast<int>(k)))));
  }
  o.require(std::max({e1, e2, e3}) <= tol, "event times within 10 event_tol");
  o.require(tz.outcome == Outcome::zeno, "Zeno fixture classified as zeno");

  SimConfig tc = cfg;
  tc.transversality_eps = 1e-3;
  const HybridTrajectory tt =
      run(CompiledModel(tangential_model()), {{"q1", "q2"}, {SwitchKind::autonomous}}, {"q1", vec({0.0})},
          HybridInput{{std::nullopt}, constant_law(vec({0.0})), {}, 0}, 0.0, 2.0, tc);
  o.require(tt.outcome == Outcome::manifold_termination, "tangential fixture classified as manifold_termination");
  o.detail << "event errors " << e1 << ", " << e2 << ", " << e3 << " (bound " << tol << "); zeno: "
           << to_string(tz.outcome) << " after " << tz.jumps.size() << " switches; tangential: "
           << to_string(tt.outcome);
  return o;
}

// Random feasible inputs for a builtin; returns false when the draw does not complete.
bool random_input(const ProblemSpec& p, std::mt19937_64& rng, HybridInput& in) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t S = p.schedule.locations.size();
  std::vector<Eigen::VectorXd> a(S), b(S);
  for (std::size_t i = 0; i < S; ++i) {
    const Location& loc = p.model.location(p.schedule.locations[i]);
    a[i] = random_in_box(loc, rng);
    b[i] = random_in_box(loc, rng);
    if (p.name == "ev") {
      // drive the speed up to the first-gear guard and pull the sun shaft through zero
      if (i <= 1) a[i](0) = b[i](0) = 0.6 + 0.4 * unif(rng);
      if (i == 2) a[i](1) = b[i](1) = -1.0;
    }
  }
  const double span = p.tf - p.t0;
  in.control = [a, b, t0 = p.t0, span](std::size_t seg, double t, const Eigen::VectorXd&) -> Eigen::VectorXd {
    const double s = (t - t0) / span;
    return (1.0 - s) * a[seg] + s * b[seg];
  };
  in.switch_times.clear();
  double prev = p.t0;
  for (std::size_t j = 0; j < p.schedule.switches(); ++j) {
    if (p.schedule.kinds[j] == SwitchKind::controlled) {
      const double lo = p.name == "ev" ? 1.1 : prev, hi = p.name == "ev" ? 1.6 : p.tf;
      prev = lo + (0.05 + 0.9 * unif(rng)) * (hi - lo);
      in.switch_times.emplace_back(prev);
    } else {
      in.switch_times.emplace_back(std::nullopt);
    }
  }
  return true;
}

Outcome_ bolza_mayer() {
  Outcome_ o;
  std::mt19937_64 rng(99);
  for (const auto& name : builtin_names()) {
    const ProblemSpec p = builtin(name);
    const CompiledModel bolza(p.model), mayer(to_mayer(p.model));
    InitialState h0 = p.h0;
    h0.x.resize(p.h0.x.size() + 1);
    h0.x << 0.0, p.h0.x;
    double worst = 0.0;
    std::size_t done = 0, tries = 0;
    while (done < 50 && tries < 5000) {
      ++tries;
      HybridInput in;
      random_input(p, rng, in);
      const HybridTrajectory tb = run(bolza, p.schedule, p.h0, in, p.t0, p.tf, p.config);
      if (tb.outcome != Outcome::completed) continue;
      HybridInput ih = in;
      ih.control = [c = in.control](std::size_t seg, double t, const Eigen::VectorXd& x) {
        return c(seg, t, x.tail(x.size() - 1));
      };
      const HybridTrajectory tm = run(mayer, p.schedule, h0, ih, p.t0, p.tf, p.config);
      if (tm.outcome != Outcome::completed) {
        o.require(false, name + " Mayer replay completes");
        break;
      }
      const double J = cost_of(bolza, tb, in.control);
      const double g = mayer.terminal(tm.final_state(), p.tf);
      worst = std::max(worst, std::fabs(J - g) / (1.0 + std::fabs(J)));
      ++done;
    }
    o.require(done == 50, name + " 50 completed random trajectories");
    o.require(worst <= 1e-9, name + " |J_bolza - g^| <= 1e-9 (1 + |J|)");
    o.detail << name << "=" << worst << " (" << done << "/" << tries << ") ";
  }

  // moving manifold: H_orig- - H_orig+ + dc/dt + p dm/dt = 0
  const HybridModel m = moving_manifold_model();
  const HamiltonianSet hs(std::make_shared<const CompiledModel>(to_time_invariant(m)));
  const HamiltonianSet orig(std::make_shared<const CompiledModel>(m));
  const Eigen::VectorXd u0 = vec({0.5});
  const ControlLaw u = constant_law(u0);
  const HybridTrajectory tr = run(hs.compiled(), {{"q1", "q2"}, {SwitchKind::autonomous}}, {"q1", vec({0.0, 1.0})},
                                  HybridInput{{std::nullopt}, u, {}, 0}, 0.0, 3.0, shooting_sim_config());
  double corollary = INFINITY;
  if (tr.outcome == Outcome::completed) {
    const AdjointTrajectory adj = integrate_adjoint_backward(hs, tr, u, shooting_sim_config());
    const SwitchRecord& sw = adj.switches[0];
    const CompiledModel& cm = orig.compiled();
    const std::size_t k = transition_named(m, "cross");
    const Eigen::VectorXd xm = tr.jumps[0].x_minus.tail(1), xp = tr.jumps[0].x_plus.tail(1);
    const double Hm = orig.value(0, xm, u0, sw.lam_minus.tail(1), sw.t);
    const double Hp = orig.value(1, xp, u0, sw.lam_plus.tail(1), sw.t);
    // c = t and m = x - t
    const double dc_dt = 1.0, dm_dt = cm.manifold_dt(k, xm, sw.t);
    corollary = std::fabs(Hm - Hp + dc_dt + sw.p * dm_dt);
    o.detail << "corollary residual=" << corollary << " (t=" << sw.t << ", p=" << sw.p << ", H-=" << Hm << ", H+=" << Hp
             << ")";
  }
  o.require(corollary <= 1e-6, "corollary Hamiltonian jump to 1e-6");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome_& o) {
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  auto guarded = [&](int id, const char* name, const std::function<Outcome_()>& f) {
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      Outcome_ o;
      o.require(false, std::string("exception: ") + e.what());
      report(id, name, o);
    }
  };

  const Solved lq = solve_builtin("lq", 16, 1);
  const Solved an = solve_builtin("analytic", 16, 1);

  guarded(1, "lq-sanity", [&] { return lq_sanity(lq); });
  guarded(2, "analytic-example", [&] { return analytic_example_check(an); });
  guarded(3, "adjoint-is-cost-gradient", [&] { return adjoint_is_gradient(lq, an); });

  const Solved ev = solve_builtin("ev", 16, 1);
  std::vector<const Solved*> sols{&lq, &an, &ev};
  std::vector<NeedleStats> stats;
  guarded(4, "needle-nonnegativity", [&] { return needle_nonnegativity(sols, stats); });
  guarded(5, "duality-conservation", [&] { return duality(sols, stats); });
  guarded(6, "ev-transmission", [&] { return ev_transmission_check(ev); });
  guarded(7, "symbolic-vs-fd-gradients", [&] { return symbolic_gradients(); });
  guarded(8, "simulation-fidelity", [&] { return simulation_fidelity(); });
  guarded(9, "bolza-mayer-equivalence", [&] { return bolza_mayer(); });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
