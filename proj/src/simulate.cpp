#include "hocp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hocp {

OdeOptions SimConfig::ode() const {
  OdeOptions o;
  o.rtol = rtol;
  o.atol = atol;
  o.h_max = h_max;
  return o;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::completed:
      return "completed";
    case Outcome::manifold_termination:
      return "manifold_termination";
    case Outcome::zeno:
      return "zeno";
    case Outcome::infeasible:
      return "infeasible";
    default:
      return "error";
  }
}

std::vector<double> HybridTrajectory::switching_times() const {
  std::vector<double> out;
  for (const auto& j : jumps) out.push_back(j.t);
  return out;
}

std::size_t HybridTrajectory::segment_at(double t) const {
  if (segments.empty()) throw std::logic_error("empty trajectory");
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (t < segments[i].t_end) return i;
  }
  return segments.size() - 1;
}

Eigen::VectorXd HybridTrajectory::state(double t) const {
  const auto& s = segments[segment_at(t)];
  return s.x(std::clamp(t, s.t_begin, s.t_end));
}

Eigen::VectorXd HybridTrajectory::final_state() const {
  const auto& s = segments.back();
  return s.x(s.t_end);
}

namespace {

double total_rate(const CompiledModel& cm, std::size_t k, std::size_t q, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& u, double t) {
  Eigen::VectorXd f;
  cm.field(q, x, u, t, f);
  return cm.manifold_grad(k, x, t).dot(f) + cm.manifold_dt(k, x, t);
}

}  // namespace

SegmentResult integrate_segment(const CompiledModel& cm, std::size_t q, const Eigen::VectorXd& x0,
                                const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& u,
                                double t_begin, double t_end, const std::vector<std::size_t>& active,
                                const SimConfig& cfg, const std::vector<double>& breakpoints) {
  SegmentResult res;
  std::vector<OdeEvent> events;
  for (std::size_t k : active) {
    double m0 = cm.manifold(k, x0, t_begin);
    double sign;
    if (std::fabs(m0) > cfg.manifold_zero_tol) {
      sign = m0 > 0.0 ? 1.0 : -1.0;
    } else {
      double rate = total_rate(cm, k, q, x0, u(t_begin, x0), t_begin);
      if (std::fabs(rate) < cfg.transversality_eps) {
        res.termination = true;
        res.event = k;
        res.ode.dense = DenseOutput(static_cast<std::size_t>(x0.size()), t_begin);
        res.ode.t_end = t_begin;
        res.ode.y_end = x0;
        return res;
      }
      sign = rate > 0.0 ? 1.0 : -1.0;
    }
    events.push_back({[&cm, k](double t, const Eigen::VectorXd& y) { return cm.manifold(k, y, t); }, sign});
  }

  Rhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { cm.field(q, y, u(t, y), t, dy); };
  OdeOptions opt = cfg.ode();
  opt.breakpoints = breakpoints;
  res.ode = integrate(rhs, t_begin, x0, t_end, opt, events, cfg.event_tol);
  if (res.ode.event >= 0) {
    std::size_t k = active[static_cast<std::size_t>(res.ode.event)];
    res.event = k;
    res.simultaneous = res.ode.simultaneous;
    double ts = res.ode.t_end;
    double rate = total_rate(cm, k, q, res.ode.y_end, u(ts, res.ode.y_end), ts);
    if (std::fabs(rate) < cfg.transversality_eps) res.termination = true;
  }
  return res;
}

HybridTrajectory run(const CompiledModel& cm, const LocationSchedule& sched, const InitialState& h0,
                     const HybridInput& input, double t0, double tf, const SimConfig& cfg) {
  const HybridModel& model = cm.model();
  HybridTrajectory traj;
  traj.t0 = t0;
  traj.tf = tf;
  traj.segment_offset = input.segment_offset;
  auto fail = [&](Outcome o, std::string msg) {
    traj.outcome = o;
    traj.message = std::move(msg);
    return traj;
  };

  std::vector<std::size_t> plan;
  try {
    if (!schedule_check(model, sched)) return fail(Outcome::error, "schedule error: not an automaton path");
    plan = schedule_transitions(model, sched);
  } catch (const std::exception& e) {
    return fail(Outcome::error, std::string("schedule error: ") + e.what());
  }
  if (h0.q != sched.locations.front()) return fail(Outcome::error, "schedule error: h0 location differs from schedule");
  if (!(tf > t0)) return fail(Outcome::error, "empty time span");
  const std::size_t L = plan.size();
  if (input.switch_times.size() != L) return fail(Outcome::error, "switch plan length differs from schedule");

  std::size_t q = *model.location_index(h0.q);
  if (static_cast<std::size_t>(h0.x.size()) != cm.loc(q).n) return fail(Outcome::error, "initial state dimension");

  for (std::size_t k : model.autonomous_out(h0.q)) {
    if (std::fabs(cm.manifold(k, h0.x, t0)) <= cfg.manifold_zero_tol) {
      traj.failing_transition = k;
      return fail(Outcome::error, "initial state lies on the manifold of " + model.transitions[k].event);
    }
  }

  const double min_dwell = cfg.dwell(t0, tf);
  double t = t0;
  double t_last = t0;
  Eigen::VectorXd x = h0.x;

  for (std::size_t i = 0;; ++i) {
    const std::string& qid = model.locations[q].id;
    double t_stop = tf;
    bool controlled_next = false;
    if (i < L && sched.kinds[i] == SwitchKind::controlled) {
      if (!input.switch_times[i]) return fail(Outcome::error, "controlled switch " + std::to_string(i) + " has no time");
      t_stop = *input.switch_times[i];
      if (!(t_stop > t) || t_stop > tf) {
        return fail(Outcome::error, "controlled switch time out of order at switch " + std::to_string(i));
      }
      controlled_next = true;
    }

    const std::size_t seg_id = input.segment_offset + i;
    auto u = [&input, seg_id](double tt, const Eigen::VectorXd& xx) { return input.control(seg_id, tt, xx); };
    SegmentResult sr;
    try {
      sr = integrate_segment(cm, q, x, u, t, t_stop, model.autonomous_out(qid), cfg, input.breakpoints);
    } catch (const std::exception& e) {
      return fail(Outcome::infeasible, std::string("integration failed in ") + qid + ": " + e.what());
    }

    Segment seg;
    seg.loc = q;
    seg.location = qid;
    seg.t_begin = t;
    seg.t_end = sr.ode.t_end;
    seg.x = std::move(sr.ode.dense);
    traj.segments.push_back(std::move(seg));

    if (sr.termination) {
      traj.failing_transition = sr.event;
      return fail(Outcome::manifold_termination,
                  "tangential arrival on manifold of " + model.transitions[*sr.event].event);
    }
    if (sr.simultaneous) {
      traj.failing_transition = sr.event;
      return fail(Outcome::infeasible, "two manifolds zero simultaneously (disjointness violated)");
    }

    std::size_t k;
    if (sr.event) {
      k = *sr.event;
      if (i >= L || sched.kinds[i] != SwitchKind::autonomous || plan[i] != k) {
        traj.failing_transition = k;
        return fail(Outcome::infeasible, "schedule error: unexpected event " + model.transitions[k].event + " at t=" +
                                        std::to_string(sr.ode.t_end));
      }
    } else if (controlled_next) {
      k = plan[i];
    } else {
      if (i < L) {
        // the guard that was never reached
        traj.failing_transition = plan[i];
        return fail(Outcome::infeasible, "schedule incomplete: " + std::to_string(i) + " of " + std::to_string(L) +
                                             " switches executed, guard of " + model.transitions[plan[i]].event +
                                             " not reached");
      }
      break;
    }

    const double ts = sr.ode.t_end;
    if (traj.jumps.size() + 1 > cfg.max_switches) return fail(Outcome::zeno, "switch count exceeds max_switches");
    if (ts - t_last < min_dwell && !traj.jumps.empty()) {
      return fail(Outcome::zeno, "dwell time below min_dwell at t=" + std::to_string(ts));
    }
    JumpRecord jr;
    jr.t = ts;
    jr.transition = k;
    jr.event = model.transitions[k].event;
    jr.kind = model.transitions[k].kind;
    jr.x_minus = sr.ode.y_end;
    try {
      jr.x_plus = cm.jump(k, jr.x_minus, ts);
    } catch (const std::exception& e) {
      return fail(Outcome::infeasible, std::string("jump evaluation failed: ") + e.what());
    }
    x = jr.x_plus;
    traj.jumps.push_back(jr);
    q = cm.trans(k).to;
    t_last = ts;
    t = ts;
    if (t >= tf) {
      // switch exactly at tf: zero-length final segment
      Segment last;
      last.loc = q;
      last.location = model.locations[q].id;
      last.t_begin = last.t_end = tf;
      last.x = DenseOutput(static_cast<std::size_t>(x.size()), tf);
      DenseOutput::Step st{tf, 0.0, Eigen::MatrixXd::Zero(x.size(), 5)};
      st.coef.col(0) = x;
      last.x.push(std::move(st));
      traj.segments.push_back(std::move(last));
      if (i + 1 < L) return fail(Outcome::infeasible, "schedule incomplete at final time");
      break;
    }
  }
  traj.outcome = Outcome::completed;
  return traj;
}

ReplayReport replay_check(const HybridTrajectory& traj, const CompiledModel& cm, const ControlLaw& control,
                          const SimConfig& cfg, double ode_tol) {
  ReplayReport rep;
  const auto& model = cm.model();
  for (std::size_t j = 0; j < traj.jumps.size(); ++j) {
    const auto& jr = traj.jumps[j];
    Eigen::VectorXd xp = cm.jump(jr.transition, jr.x_minus, jr.t);
    double r = xp.size() == jr.x_plus.size() ? (xp - jr.x_plus).lpNorm<Eigen::Infinity>()
                                             : std::numeric_limits<double>::infinity();
    rep.jump_residual = std::max(rep.jump_residual, r);
    if (r > 1e-12 * (1.0 + xp.lpNorm<Eigen::Infinity>())) {
      rep.problems.push_back("jump " + std::to_string(j) + " (" + jr.event + "): x+ != xi(x-), residual " +
                             std::to_string(r));
    }
    if (model.transitions[jr.transition].kind == SwitchKind::autonomous) {
      const std::size_t q = cm.trans(jr.transition).from;
      Eigen::VectorXd u = control(traj.segment_offset + j, jr.t, jr.x_minus);
      double rate = total_rate(cm, jr.transition, q, jr.x_minus, u, jr.t);
      double mres = std::fabs(cm.manifold(jr.transition, jr.x_minus, jr.t)) / (1.0 + std::fabs(rate));
      rep.manifold_residual = std::max(rep.manifold_residual, mres);
      if (mres > cfg.event_tol) {
        rep.problems.push_back("jump " + std::to_string(j) + " (" + jr.event + "): manifold residual " +
                               std::to_string(mres));
      }
    }
  }
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& s = traj.segments[i];
    if (s.t_end <= s.t_begin) continue;
    auto mesh = s.x.mesh();
    Eigen::VectorXd f;
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
      double tm = 0.5 * (mesh[k] + mesh[k + 1]);
      Eigen::VectorXd xm = s.x(tm);
      cm.field(s.loc, xm, control(traj.segment_offset + i, tm, xm), tm, f);
      double r = (s.x.derivative(tm) - f).lpNorm<Eigen::Infinity>() / (1.0 + f.lpNorm<Eigen::Infinity>());
      rep.ode_residual = std::max(rep.ode_residual, r);
    }
  }
  if (rep.ode_residual > ode_tol) {
    rep.problems.push_back("ODE residual " + std::to_string(rep.ode_residual) + " above " + std::to_string(ode_tol));
  }
  return rep;
}

namespace {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double simpson(const F& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double cost_of(const CompiledModel& cm, const HybridTrajectory& traj, const ControlLaw& control) {
  if (traj.outcome != Outcome::completed) throw std::invalid_argument("cost_of needs a completed trajectory");
  double J = 0.0;
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& s = traj.segments[i];
    if (s.t_end <= s.t_begin) continue;
    auto mesh = s.x.mesh();
    auto l = [&](double t) {
      Eigen::VectorXd x = s.x(t);
      return cm.running_cost(s.loc, x, control(traj.segment_offset + i, t, x), t);
    };
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
      double tol = 1e-13 * std::max(1.0, std::fabs(mesh[k + 1] - mesh[k]));
      J += simpson(l, mesh[k], mesh[k + 1], tol);
    }
  }
  for (const auto& jr : traj.jumps) J += cm.switching_cost(jr.transition, jr.x_minus, jr.t);
  J += cm.terminal(traj.final_state(), traj.tf);
  return J;
}

}  // namespace hocp
