#include "hocp/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace hocp {

namespace {

struct Unpacked {
  std::vector<double> times;
  Eigen::VectorXd lam0;
  std::vector<Eigen::VectorXd> lam_plus;
  std::vector<double> p;
};

Unpacked unpack(const ShootingProblem& prob, const Eigen::VectorXd& z) {
  Unpacked u;
  u.times = prob.times(z);
  u.lam0 = z.head(static_cast<Eigen::Index>(prob.lam0_dim));
  for (const auto& s : prob.slots) {
    u.lam_plus.push_back(z.segment(static_cast<Eigen::Index>(s.lam_plus), static_cast<Eigen::Index>(s.lam_dim)));
    u.p.push_back(s.p ? z(static_cast<Eigen::Index>(*s.p)) : 0.0);
  }
  return u;
}

DenseOutput constant_output(const Eigen::VectorXd& v, double t) {
  DenseOutput d(static_cast<std::size_t>(v.size()), t);
  DenseOutput::Step st{t, 0.0, Eigen::MatrixXd::Zero(v.size(), 5)};
  st.coef.col(0) = v;
  d.push(std::move(st));
  return d;
}

struct Propagation {
  Eigen::VectorXd residual;
  HybridTrajectory traj;
  AdjointTrajectory adj;
};

Propagation propagate(const ShootingProblem& prob, const Eigen::VectorXd& z, const SolverConfig& cfg, bool keep) {
  const HamiltonianSet& hs = *prob.hs;
  const CompiledModel& cm = hs.compiled();
  const HybridModel& wm = cm.model();
  const Unpacked u = unpack(prob, z);
  const std::size_t L = prob.slots.size();

  Propagation out;
  out.residual.resize(static_cast<Eigen::Index>(prob.size()));
  Eigen::Index row = 0;
  if (keep) {
    out.traj.t0 = prob.t0;
    out.traj.tf = prob.tf;
    out.traj.outcome = Outcome::completed;
  }

  Eigen::VectorXd x = prob.x0, lam = u.lam0;
  double ta = prob.t0;
  OdeOptions opt = cfg.sim.ode();
  for (std::size_t i = 0; i <= L; ++i) {
    const double tb = i < L ? u.times[i] : prob.tf;
    if (!(tb >= ta)) throw ShootingError("switching times out of order");
    const std::size_t q = prob.locs[i];
    const Eigen::Index n = static_cast<Eigen::Index>(cm.loc(q).n);
    Eigen::VectorXd y(2 * n);
    y << x, lam;
    DenseOutput dense;
    if (tb > ta) {
      Rhs rhs = [&](double t, const Eigen::VectorXd& yy, Eigen::VectorXd& dy) {
        Eigen::VectorXd xx = yy.head(n), ll = yy.tail(n);
        Minimizer mz = hs.minimize(q, xx, ll, t);
        Eigen::VectorXd f;
        cm.field(q, xx, mz.u, t, f);
        dy.resize(2 * n);
        dy.head(n) = f;
        dy.tail(n) = -hs.state_gradient(q, xx, mz.u, ll, t);
      };
      OdeResult r;
      try {
        r = integrate(rhs, ta, y, tb, opt);
      } catch (const std::exception& e) {
        throw ShootingError(std::string("segment ") + std::to_string(i + 1) + ": " + e.what());
      }
      if (!r.y_end.allFinite()) throw ShootingError("non-finite state or adjoint");
      y = r.y_end;
      dense = std::move(r.dense);
    } else {
      dense = constant_output(y, ta);
    }
    const Eigen::VectorXd xm = y.head(n), lm = y.tail(n);
    if (keep) {
      out.traj.segments.push_back(Segment{q, wm.locations[q].id, ta, tb, dense.block(0, n)});
      out.adj.segments.push_back(AdjointSegment{q, ta, tb, dense.block(n, n)});
    }
    if (i == L) {
      Eigen::VectorXd dg = hs.terminal_gradient(xm, tb);
      out.residual.segment(row, n) = lm - dg;
      row += n;
      break;
    }

    const auto& slot = prob.slots[i];
    const std::size_t k = prob.transitions[i];
    const std::size_t qn = prob.locs[i + 1];
    try {
      if (slot.autonomous) out.residual(row++) = cm.manifold(k, xm, tb);
      Eigen::VectorXd xp = cm.jump(k, xm, tb);
      const Eigen::VectorXd& lp = u.lam_plus[i];
      Eigen::VectorXd target = adjoint_jump(hs, k, xm, tb, lp, u.p[i]);
      out.residual.segment(row, n) = lm - target;
      row += n;
      Minimizer before = hs.minimize(q, xm, lm, tb);
      Minimizer after = hs.minimize(qn, xp, lp, tb);
      if (slot.time) out.residual(row++) = before.H - after.H;
      if (keep) {
        out.traj.jumps.push_back(JumpRecord{tb, k, wm.transitions[k].event, wm.transitions[k].kind, xm, xp});
        out.adj.switches.push_back(SwitchRecord{tb, k, u.p[i], before.H, after.H, lm, lp});
      }
      x = xp;
    } catch (const ShootingError&) {
      throw;
    } catch (const std::exception& e) {
      throw ShootingError(std::string("switch ") + std::to_string(i + 1) + ": " + e.what());
    }
    lam = u.lam_plus[i];
    ta = tb;
  }
  if (!out.residual.allFinite()) throw ShootingError("non-finite residual");
  return out;
}

bool ordered(const ShootingProblem& prob, const std::vector<double>& times) {
  double prev = prob.t0;
  for (double t : times) {
    if (!(t > prev)) return false;
    prev = t;
  }
  return prev < prob.tf;
}

// Largest step fraction keeping every gap t0 < t1 < ... < tf positive.
double ordering_limit(const ShootingProblem& prob, const Eigen::VectorXd& z, const Eigen::VectorXd& d) {
  Eigen::VectorXd dz = d;
  std::vector<double> a = prob.times(z);
  std::vector<double> b = prob.times(z + dz);
  a.insert(a.begin(), prob.t0);
  b.insert(b.begin(), prob.t0);
  a.push_back(prob.tf);
  b.push_back(prob.tf);
  double lim = 1.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const double gap = a[i + 1] - a[i];
    const double dgap = (b[i + 1] - b[i]) - gap;
    if (dgap < 0.0) lim = std::min(lim, 0.9 * gap / -dgap);
  }
  return lim;
}

}  // namespace

std::vector<double> ShootingProblem::times(const Eigen::VectorXd& z) const {
  std::vector<double> t(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    t[j] = slots[j].time ? z(static_cast<Eigen::Index>(*slots[j].time)) : pinned[j].value();
  }
  return t;
}

ShootingProblem assemble(const HybridModel& model, const LocationSchedule& sched, const InitialState& h0, double t0,
                         double tf, const std::vector<std::optional<double>>& pinned) {
  ValidationReport issues = validate(model);
  if (!issues.empty()) {
    throw std::invalid_argument("model fails validation: " + issues.front().path + ": " + issues.front().message);
  }
  if (!schedule_check(model, sched)) throw std::invalid_argument("schedule is not a path of the automaton");
  if (sched.locations.empty() || h0.q != sched.locations.front()) {
    throw std::invalid_argument("initial location does not start the schedule");
  }
  if (!(t0 < tf)) throw std::invalid_argument("need t0 < tf");
  const std::size_t L = sched.switches();
  if (!pinned.empty() && pinned.size() != L) throw std::invalid_argument("one pinned entry per switch expected");

  ShootingProblem prob;
  prob.model = model;
  prob.clock = model.time_varying;
  HybridModel work = prob.clock ? to_time_invariant(model) : model;
  auto cm = std::make_shared<const CompiledModel>(work);
  prob.hs = std::make_shared<const HamiltonianSet>(cm);
  prob.schedule = sched;
  for (const auto& id : sched.locations) prob.locs.push_back(*work.location_index(id));
  prob.transitions = schedule_transitions(work, sched);
  prob.h0 = h0;
  const std::size_t n0 = model.locations[prob.locs[0]].state_dim;
  if (static_cast<std::size_t>(h0.x.size()) != n0) throw std::invalid_argument("initial state has the wrong size");
  if (prob.clock) {
    prob.x0.resize(h0.x.size() + 1);
    prob.x0 << t0, h0.x;
  } else {
    prob.x0 = h0.x;
  }
  prob.t0 = t0;
  prob.tf = tf;
  prob.pinned = pinned.empty() ? std::vector<std::optional<double>>(L) : pinned;

  auto idx = [](std::size_t i) { return "[" + std::to_string(i + 1) + "]"; };
  prob.lam0_dim = cm->loc(prob.locs[0]).n;
  for (std::size_t i = 0; i < prob.lam0_dim; ++i) prob.unknown_names.push_back("lambda0" + idx(i));
  for (std::size_t j = 0; j < L; ++j) {
    const std::string tag = "switch" + std::to_string(j + 1);
    ShootingProblem::Slot s;
    s.autonomous = sched.kinds[j] == SwitchKind::autonomous;
    if (s.autonomous && prob.pinned[j]) {
      throw std::invalid_argument(tag + ": pinned time on an autonomous switch leaves the system non-square");
    }
    if (!prob.pinned[j]) {
      s.time = prob.unknown_names.size();
      prob.unknown_names.push_back(tag + ".t");
    }
    s.lam_plus = prob.unknown_names.size();
    s.lam_dim = cm->loc(prob.locs[j + 1]).n;
    for (std::size_t i = 0; i < s.lam_dim; ++i) prob.unknown_names.push_back(tag + ".lambda_plus" + idx(i));
    if (s.autonomous) {
      s.p = prob.unknown_names.size();
      prob.unknown_names.push_back(tag + ".p");
    }
    prob.slots.push_back(s);

    if (s.autonomous) prob.residual_names.push_back(tag + ".manifold");
    for (std::size_t i = 0; i < cm->loc(prob.locs[j]).n; ++i) prob.residual_names.push_back(tag + ".jump" + idx(i));
    if (s.time) prob.residual_names.push_back(tag + ".hamiltonian");
  }
  for (std::size_t i = 0; i < cm->loc(prob.locs[L]).n; ++i) prob.residual_names.push_back("terminal" + idx(i));
  if (prob.residual_names.size() != prob.unknown_names.size()) {
    throw std::invalid_argument("non-square shooting system: " + std::to_string(prob.unknown_names.size()) +
                                " unknowns, " + std::to_string(prob.residual_names.size()) + " residuals");
  }
  return prob;
}

Eigen::VectorXd shooting_residual(const ShootingProblem& prob, const Eigen::VectorXd& z, const SolverConfig& cfg) {
  if (static_cast<std::size_t>(z.size()) != prob.size()) throw std::invalid_argument("unknown vector has the wrong size");
  return propagate(prob, z, cfg, false).residual;
}

SolveReport evaluate(const ShootingProblem& prob, const Eigen::VectorXd& z, const SolverConfig& cfg) {
  SolveReport rep;
  rep.unknowns = z;
  rep.unknown_names = prob.unknown_names;
  rep.switch_times = prob.times(z);
  Propagation pr;
  try {
    pr = propagate(prob, z, cfg, true);
  } catch (const ShootingError& e) {
    rep.message = e.what();
    return rep;
  }
  for (std::size_t i = 0; i < prob.size(); ++i) {
    rep.residuals.push_back({prob.residual_names[i], pr.residual(static_cast<Eigen::Index>(i))});
  }
  rep.residual_norm = pr.residual.lpNorm<Eigen::Infinity>();
  for (const auto& sw : pr.adj.switches) rep.multipliers.push_back(sw.p);

  auto joint = std::make_shared<const std::pair<HybridTrajectory, AdjointTrajectory>>(pr.traj, pr.adj);
  auto hs = prob.hs;
  rep.control = [joint, hs](std::size_t seg, double t, const Eigen::VectorXd&) -> Eigen::VectorXd {
    const auto& [tr, adj] = *joint;
    seg = std::min(seg, tr.segments.size() - 1);
    const Segment& s = tr.segments[seg];
    const double tc = std::clamp(t, s.t_begin, s.t_end);
    return hs->minimize(s.loc, s.x(tc), adj.at(seg, tc), tc).u;
  };
  rep.trajectory = std::move(pr.traj);
  rep.adjoint = std::move(pr.adj);
  try {
    rep.cost = cost_of(prob.hs->compiled(), rep.trajectory, rep.control);
  } catch (const std::exception& e) {
    rep.message = std::string("cost evaluation failed: ") + e.what();
  }

  HybridInput in;
  in.control = rep.control;
  for (std::size_t j = 0; j < prob.slots.size(); ++j) {
    if (!prob.slots[j].autonomous) {
      in.switch_times.emplace_back(rep.switch_times[j]);
    } else {
      in.switch_times.emplace_back(std::nullopt);
    }
  }
  try {
    HybridTrajectory v = run(prob.hs->compiled(), prob.schedule, InitialState{prob.h0.q, prob.x0}, in, prob.t0,
                             prob.tf, cfg.sim);
    if (v.outcome == Outcome::completed && v.jumps.size() == rep.switch_times.size()) {
      double gap = 0.0;
      for (std::size_t j = 0; j < v.jumps.size(); ++j) gap = std::max(gap, std::fabs(v.jumps[j].t - rep.switch_times[j]));
      rep.validation_gap = gap;
      rep.feasible = gap <= cfg.feasibility_tol;
    }
    rep.validation = std::move(v);
  } catch (const std::exception& e) {
    if (rep.message.empty()) rep.message = std::string("validation run failed: ") + e.what();
  }
  return rep;
}

SolveReport shoot(const ShootingProblem& prob, const Eigen::VectorXd& guess, const SolverConfig& cfg) {
  const std::size_t N = prob.size();
  if (static_cast<std::size_t>(guess.size()) != N) throw std::invalid_argument("guess has the wrong size");
  if (!ordered(prob, prob.times(guess))) throw std::invalid_argument("guess violates t0 < t1 < ... < tf");

  Eigen::VectorXd z = guess;
  Eigen::VectorXd R;
  try {
    R = shooting_residual(prob, z, cfg);
  } catch (const ShootingError& e) {
    SolveReport rep = evaluate(prob, z, cfg);
    rep.message = std::string("initial guess: ") + e.what();
    return rep;
  }
  const Eigen::VectorXd S = (1.0 + R.array().abs()).inverse().matrix();
  auto merit = [&](const Eigen::VectorXd& r) { return 0.5 * S.cwiseProduct(r).squaredNorm(); };

  std::size_t it = 0;
  bool converged = false;
  std::string message;
  Eigen::MatrixXd J(N, N);
  while (true) {
    if (R.lpNorm<Eigen::Infinity>() <= cfg.newton_tol) {
      converged = true;
      break;
    }
    if (it >= cfg.max_iterations) {
      message = "no convergence after " + std::to_string(it) + " iterations";
      break;
    }
    bool jac_ok = true;
    for (std::size_t c = 0; c < N && jac_ok; ++c) {
      const Eigen::Index ci = static_cast<Eigen::Index>(c);
      const double h = cfg.fd_step * (1.0 + std::fabs(z(ci)));
      Eigen::VectorXd zp = z, zm = z;
      zp(ci) += h;
      zm(ci) -= h;
      std::optional<Eigen::VectorXd> rp, rm;
      try {
        rp = shooting_residual(prob, zp, cfg);
      } catch (const ShootingError&) {
      }
      try {
        rm = shooting_residual(prob, zm, cfg);
      } catch (const ShootingError&) {
      }
      if (rp && rm) {
        J.col(ci) = (*rp - *rm) / (2.0 * h);
      } else if (rp) {
        J.col(ci) = (*rp - R) / h;
      } else if (rm) {
        J.col(ci) = (R - *rm) / h;
      } else {
        jac_ok = false;
      }
    }
    if (!jac_ok) {
      message = "finite-difference Jacobian failed";
      break;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S.asDiagonal() * J);
    if (qr.rank() < static_cast<Eigen::Index>(N)) {
      message = "Jacobian singular to working precision";
      break;
    }
    Eigen::VectorXd d = qr.solve(-S.cwiseProduct(R));
    const double phi0 = merit(R);
    double alpha = ordering_limit(prob, z, d);
    bool accepted = false;
    while (alpha >= cfg.min_damping) {
      Eigen::VectorXd zt = z + alpha * d;
      try {
        Eigen::VectorXd Rt = shooting_residual(prob, zt, cfg);
        if (merit(Rt) <= (1.0 - 2.0 * cfg.armijo * alpha) * phi0) {
          z = zt;
          R = Rt;
          accepted = true;
          break;
        }
      } catch (const ShootingError&) {
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Levenberg-Marquardt fallback when the Newton direction does not descend
      const Eigen::MatrixXd A = S.asDiagonal() * J;
      const Eigen::MatrixXd AtA = A.transpose() * A;
      const Eigen::VectorXd g = A.transpose() * S.cwiseProduct(R);
      const double mu0 = 1e-6 * std::max(AtA.diagonal().maxCoeff(), 1e-300);
      for (double mu = mu0; mu <= 1e8 * mu0 && !accepted; mu *= 10.0) {
        Eigen::MatrixXd M = AtA;
        M.diagonal().array() += mu;
        Eigen::VectorXd dl = -M.ldlt().solve(g);
        dl *= std::min(1.0, ordering_limit(prob, z, dl));
        Eigen::VectorXd zt = z + dl;
        try {
          Eigen::VectorXd Rt = shooting_residual(prob, zt, cfg);
          if (merit(Rt) < (1.0 - cfg.armijo) * phi0) {
            z = zt;
            R = Rt;
            accepted = true;
          }
        } catch (const ShootingError&) {
        }
      }
    }
    ++it;
    if (!accepted) {
      message = "line search failed";
      break;
    }
  }

  SolveReport rep = evaluate(prob, z, cfg);
  rep.iterations = it;
  rep.converged = converged && rep.residual_norm <= cfg.newton_tol;
  if (rep.message.empty()) rep.message = converged ? "converged" : message;
  return rep;
}

const SolveReport& MultistartResult::best_report() const {
  if (!best) throw ShootingError("no start converged to a feasible extremal");
  return reports[*best];
}

std::vector<Eigen::VectorXd> starting_guesses(const ShootingProblem& prob, std::size_t n_starts, std::uint64_t seed,
                                              const SolverConfig& cfg) {
  const HamiltonianSet& hs = *prob.hs;
  const CompiledModel& cm = hs.compiled();
  const std::size_t L = prob.slots.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto simulate_with = [&](const std::vector<Eigen::VectorXd>& uconst, const std::vector<double>& times)
      -> std::optional<std::pair<HybridTrajectory, ControlLaw>> {
    HybridInput in;
    in.control = [uconst](std::size_t seg, double, const Eigen::VectorXd&) { return uconst[seg]; };
    for (std::size_t j = 0; j < L; ++j) {
      if (prob.slots[j].autonomous) {
        in.switch_times.emplace_back(std::nullopt);
      } else {
        in.switch_times.emplace_back(times[j]);
      }
    }
    try {
      HybridTrajectory tr = run(cm, prob.schedule, InitialState{prob.h0.q, prob.x0}, in, prob.t0, prob.tf, cfg.sim);
      if (tr.outcome != Outcome::completed) return std::nullopt;
      return std::make_pair(std::move(tr), in.control);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  auto center_control = [&]() {
    std::vector<Eigen::VectorXd> u;
    for (std::size_t q : prob.locs) {
      const auto& box = cm.model().locations[q].control_box;
      Eigen::VectorXd c(static_cast<Eigen::Index>(box.size()));
      for (std::size_t i = 0; i < box.size(); ++i) c(static_cast<Eigen::Index>(i)) = 0.5 * (box[i].lo + box[i].hi);
      u.push_back(c);
    }
    return u;
  };

  auto sample_times = [&]() {
    std::vector<double> t(L);
    const double span = prob.tf - prob.t0;
    for (std::size_t j = 0; j < L; ++j) {
      t[j] = prob.pinned[j] ? *prob.pinned[j]
                            : prob.t0 + (static_cast<double>(j) + 1.0 + 0.8 * (unif(rng) - 0.5)) * span /
                                            static_cast<double>(L + 1);
    }
    return t;
  };

  double scale = 1.0;
  if (cfg.adjoint_scale) {
    scale = *cfg.adjoint_scale;
  } else {
    std::vector<double> t(L);
    for (std::size_t j = 0; j < L; ++j) {
      t[j] = prob.pinned[j] ? *prob.pinned[j]
                            : prob.t0 + static_cast<double>(j + 1) * (prob.tf - prob.t0) / static_cast<double>(L + 1);
    }
    if (auto sim = simulate_with(center_control(), t)) {
      const double g = hs.terminal_gradient(sim->first.final_state(), prob.tf).lpNorm<Eigen::Infinity>();
      if (std::isfinite(g) && g > 0.0) scale = g;
    }
  }

  std::vector<Eigen::VectorXd> guesses;
  for (std::size_t s = 0; s < n_starts; ++s) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob.size()));
    std::vector<double> times = sample_times();
    // draw every random number up front so each start consumes a fixed amount
    std::vector<Eigen::VectorXd> uconst = center_control();
    for (std::size_t i = 0; i < uconst.size(); ++i) {
      const auto& box = cm.model().locations[prob.locs[i]].control_box;
      for (std::size_t c = 0; c < box.size(); ++c) {
        const double r = unif(rng);
        if (s > 0) uconst[i](static_cast<Eigen::Index>(c)) = box[c].lo + r * (box[c].hi - box[c].lo);
      }
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = scale * normal(rng);
    for (std::size_t j = 0; j < L; ++j) {
      if (prob.slots[j].time) z(static_cast<Eigen::Index>(*prob.slots[j].time)) = times[j];
    }

    if (s % 2 == 0) {
      if (auto sim = simulate_with(uconst, times)) {
        try {
          AdjointTrajectory adj = integrate_adjoint_backward(hs, sim->first, sim->second, cfg.sim);
          Eigen::VectorXd zs = z;
          zs.head(static_cast<Eigen::Index>(prob.lam0_dim)) = adj.at(0, prob.t0);
          for (std::size_t j = 0; j < L; ++j) {
            const auto& slot = prob.slots[j];
            if (slot.time) zs(static_cast<Eigen::Index>(*slot.time)) = sim->first.jumps[j].t;
            zs.segment(static_cast<Eigen::Index>(slot.lam_plus), static_cast<Eigen::Index>(slot.lam_dim)) =
                adj.switches[j].lam_plus;
            if (slot.p) zs(static_cast<Eigen::Index>(*slot.p)) = adj.switches[j].p;
          }
          if (zs.allFinite() && ordered(prob, prob.times(zs))) z = zs;
        } catch (const std::exception&) {
        }
      }
    }
    guesses.push_back(std::move(z));
  }
  return guesses;
}

MultistartResult multistart(const ShootingProblem& prob, std::size_t n_starts, std::uint64_t seed,
                            const SolverConfig& cfg) {
  if (n_starts < 1) throw std::invalid_argument("need at least one start");
  std::vector<Eigen::VectorXd> guesses = starting_guesses(prob, n_starts, seed, cfg);
  MultistartResult res;
  res.reports.resize(n_starts);

  auto work = [&](std::size_t s) {
    SolveReport rep;
    try {
      rep = shoot(prob, guesses[s], cfg);
    } catch (const std::exception& e) {
      rep.unknowns = guesses[s];
      rep.unknown_names = prob.unknown_names;
      rep.message = e.what();
    }
    rep.start = s;
    res.reports[s] = std::move(rep);
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_starts));
  if (threads <= 1) {
    for (std::size_t s = 0; s < n_starts; ++s) work(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < n_starts; s = next++) work(s);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t s = 0; s < n_starts; ++s) {
    const auto& r = res.reports[s];
    if (r.converged && r.feasible && std::isfinite(r.cost) && (!res.best || r.cost < res.reports[*res.best].cost)) res.best = s;
  }
  return res;
}

}  // namespace hocp
