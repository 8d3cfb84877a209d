#include "hocp/hmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hocp {

namespace {

Hamiltonian make_hamiltonian(const Location& loc, std::size_t index) {
  Hamiltonian h;
  h.loc = index;
  h.n = loc.state_dim;
  h.m = loc.control_dim;
  Expr H = loc.running_cost;
  for (std::size_t i = 0; i < h.n; ++i) H = H + Expr::variable(adjoint_var(i)) * loc.field[i];
  h.H = H;
  for (std::size_t i = 0; i < h.n; ++i) {
    h.dH_dx.push_back(differentiate(H, state_var(i)));
    h.dH_dlam.push_back(differentiate(H, adjoint_var(i)));
  }
  for (std::size_t i = 0; i < h.m; ++i) h.dH_du.push_back(differentiate(H, control_var(i)));
  h.dH_dt = differentiate(H, kTimeVar);

  h.separable = true;
  std::map<std::string, Expr, std::less<>> zero_u;
  for (std::size_t j = 0; j < h.m; ++j) zero_u.emplace(control_var(j), Expr::constant(0.0));
  for (std::size_t i = 0; i < h.m && h.separable; ++i) {
    const Expr& d = h.dH_du[i];
    for (std::size_t j = 0; j < h.m; ++j) {
      if (j != i && depends_on(d, control_var(j))) h.separable = false;
    }
    Expr a = differentiate(d, control_var(i));
    for (std::size_t j = 0; j < h.m; ++j) {
      if (depends_on(a, control_var(j))) h.separable = false;
    }
    h.quad.push_back(a);
    h.lin.push_back(substitute(d, zero_u));
  }
  if (!h.separable) {
    h.quad.clear();
    h.lin.clear();
  }
  return h;
}

std::vector<double> pack(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t, const Eigen::VectorXd& lam) {
  return pack_location(x, u, t, lam);
}

}  // namespace

std::vector<Hamiltonian> build_hamiltonians(const HybridModel& model) {
  std::vector<Hamiltonian> out;
  for (std::size_t q = 0; q < model.locations.size(); ++q) out.push_back(make_hamiltonian(model.locations[q], q));
  return out;
}

HamiltonianSet::HamiltonianSet(std::shared_ptr<const CompiledModel> cm) : cm_(std::move(cm)) {
  const HybridModel& model = cm_->model();
  ham_ = build_hamiltonians(model);
  for (const auto& h : ham_) {
    auto layout = location_layout(h.n, h.m);
    CompiledHam c;
    c.H = Program(h.H, layout);
    for (const auto& e : h.dH_dx) c.dH_dx.emplace_back(e, layout);
    for (const auto& e : h.dH_du) c.dH_du.emplace_back(e, layout);
    for (const auto& e : h.quad) c.quad.emplace_back(e, layout);
    for (const auto& e : h.lin) c.lin.emplace_back(e, layout);
    c.dH_dt = Program(h.dH_dt, layout);
    cham_.push_back(std::move(c));
    max_dim_ = std::max(max_dim_, h.n);
  }
  for (const auto& tr : model.transitions) {
    const std::size_t n = model.location(tr.from).state_dim;
    auto layout = state_layout(n);
    TransitionDerivatives d;
    CompiledTrans c;
    for (const auto& xi : tr.jump) {
      std::vector<Expr> row;
      std::vector<Program> prow;
      for (std::size_t j = 0; j < n; ++j) {
        row.push_back(differentiate(xi, state_var(j)));
        prow.emplace_back(row.back(), layout);
      }
      d.jump_jac.push_back(std::move(row));
      c.jac.push_back(std::move(prow));
      d.jump_dt.push_back(differentiate(xi, kTimeVar));
    }
    for (std::size_t j = 0; j < n; ++j) {
      d.cost_grad.push_back(differentiate(tr.switching_cost, state_var(j)));
      c.cost_grad.emplace_back(d.cost_grad.back(), layout);
      if (tr.manifold) d.manifold_grad.push_back(differentiate(*tr.manifold, state_var(j)));
    }
    d.cost_dt = differentiate(tr.switching_cost, kTimeVar);
    if (tr.manifold) d.manifold_dt = differentiate(*tr.manifold, kTimeVar);
    tder_.push_back(std::move(d));
    ctrans_.push_back(std::move(c));
  }
  std::vector<std::string> tl{kTimeVar};
  for (std::size_t i = 0; i < max_dim_; ++i) tl.push_back(state_var(i));
  for (std::size_t i = 0; i < max_dim_; ++i) terminal_grad_.emplace_back(differentiate(model.terminal_cost, state_var(i)), tl);
  terminal_dt_ = Program(differentiate(model.terminal_cost, kTimeVar), tl);
}

double HamiltonianSet::value(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& lam, double t) const {
  return cham_[q].H(pack(x, u, t, lam));
}

Eigen::VectorXd HamiltonianSet::state_gradient(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                               const Eigen::VectorXd& lam, double t) const {
  auto v = pack(x, u, t, lam);
  const auto& c = cham_[q];
  Eigen::VectorXd g(static_cast<Eigen::Index>(c.dH_dx.size()));
  for (std::size_t i = 0; i < c.dH_dx.size(); ++i) g[static_cast<Eigen::Index>(i)] = c.dH_dx[i](v);
  return g;
}

double HamiltonianSet::time_partial(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& lam, double t) const {
  return cham_[q].dH_dt(pack(x, u, t, lam));
}

Minimizer HamiltonianSet::minimize(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& lam,
                                   double t) const {
  const Hamiltonian& h = ham_[q];
  const CompiledHam& c = cham_[q];
  const auto& box = cm_->model().locations[q].control_box;
  const Eigen::Index m = static_cast<Eigen::Index>(h.m);
  Minimizer best;
  best.u = Eigen::VectorXd::Zero(m);
  auto v = pack(x, best.u, t, lam);
  const std::size_t uoff = h.n;

  if (h.separable) {
    for (std::size_t i = 0; i < h.m; ++i) {
      const double a = c.quad[i](v);
      const double b = c.lin[i](v);
      const double lo = box[i].lo, hi = box[i].hi;
      double ui;
      if (a > 0.0) {
        ui = std::clamp(-b / a, lo, hi);
      } else {
        double hl = 0.5 * a * lo * lo + b * lo;
        double hh = 0.5 * a * hi * hi + b * hi;
        ui = hl <= hh ? lo : hi;
      }
      best.u[static_cast<Eigen::Index>(i)] = ui;
    }
    for (std::size_t i = 0; i < h.m; ++i) v[uoff + i] = best.u[static_cast<Eigen::Index>(i)];
    best.H = c.H(v);
    if (!std::isfinite(best.H)) throw DomainError("non-finite Hamiltonian");
    return best;
  }

  // Projected gradient descent from the box center and up to seven corners.
  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd center(m);
  for (Eigen::Index i = 0; i < m; ++i) center[i] = 0.5 * (box[i].lo + box[i].hi);
  starts.push_back(center);
  const std::size_t corners = h.m >= 3 ? 7 : (std::size_t{1} << h.m);
  for (std::size_t k = 0; k < corners && starts.size() < 8; ++k) {
    Eigen::VectorXd cu(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      bool high = (k >> (m - 1 - i)) & 1u;
      cu[i] = high ? box[i].hi : box[i].lo;
    }
    starts.push_back(cu);
  }
  auto evalH = [&](const Eigen::VectorXd& u) {
    for (std::size_t i = 0; i < h.m; ++i) v[uoff + i] = u[static_cast<Eigen::Index>(i)];
    return c.H(v);
  };
  auto project = [&](Eigen::VectorXd u) {
    for (Eigen::Index i = 0; i < m; ++i) u[i] = std::clamp(u[i], box[i].lo, box[i].hi);
    return u;
  };
  best.H = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    Eigen::VectorXd u = s;
    double Hu = evalH(u);
    double step = 1.0;
    for (int it = 0; it < 500; ++it) {
      evalH(u);
      Eigen::VectorXd g(m);
      for (std::size_t i = 0; i < h.m; ++i) g[static_cast<Eigen::Index>(i)] = c.dH_du[i](v);
      bool moved = false;
      double a = step;
      for (int ls = 0; ls < 60; ++ls) {
        Eigen::VectorXd cand = project(u - a * g);
        if ((cand - u).lpNorm<Eigen::Infinity>() == 0.0) break;
        double Hc = evalH(cand);
        if (Hc < Hu) {
          double dec = Hu - Hc;
          u = cand;
          Hu = Hc;
          moved = true;
          step = std::min(a * 2.0, 1e6);
          if (dec <= 1e-10 * (1.0 + std::fabs(Hu))) moved = false;
          break;
        }
        a *= 0.5;
      }
      if (!moved) break;
    }
    if (!std::isfinite(Hu)) throw DomainError("non-finite Hamiltonian");
    bool better = Hu < best.H - 1e-12 * (1.0 + std::fabs(Hu));
    bool tie = !better && std::fabs(Hu - best.H) <= 1e-12 * (1.0 + std::fabs(Hu));
    if (better || (tie && std::lexicographical_compare(u.data(), u.data() + m, best.u.data(), best.u.data() + m))) {
      best.u = u;
      best.H = Hu;
    }
  }
  return best;
}

Eigen::MatrixXd HamiltonianSet::jump_jacobian(std::size_t k, const Eigen::VectorXd& x, double t) const {
  const auto& c = ctrans_[k];
  auto v = pack_state(x, t);
  Eigen::MatrixXd J(static_cast<Eigen::Index>(c.jac.size()), x.size());
  for (std::size_t i = 0; i < c.jac.size(); ++i) {
    for (std::size_t j = 0; j < c.jac[i].size(); ++j) {
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.jac[i][j](v);
    }
  }
  return J;
}

Eigen::VectorXd HamiltonianSet::cost_gradient(std::size_t k, const Eigen::VectorXd& x, double t) const {
  const auto& c = ctrans_[k];
  auto v = pack_state(x, t);
  Eigen::VectorXd g(static_cast<Eigen::Index>(c.cost_grad.size()));
  for (std::size_t i = 0; i < c.cost_grad.size(); ++i) g[static_cast<Eigen::Index>(i)] = c.cost_grad[i](v);
  return g;
}

Eigen::VectorXd HamiltonianSet::terminal_gradient(const Eigen::VectorXd& x, double t) const {
  std::vector<double> v(max_dim_ + 1, 0.0);
  v[0] = t;
  for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i) + 1] = x[i];
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = terminal_grad_[static_cast<std::size_t>(i)](v);
  return g;
}

double HamiltonianSet::terminal_time_partial(const Eigen::VectorXd& x, double t) const {
  std::vector<double> v(max_dim_ + 1, 0.0);
  v[0] = t;
  for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i) + 1] = x[i];
  return terminal_dt_(v);
}

Minimizer minimize_hamiltonian(const HamiltonianSet& hs, std::size_t q, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lam, double t) {
  return hs.minimize(q, x, lam, t);
}

Eigen::VectorXd adjoint_jump(const HamiltonianSet& hs, std::size_t k, const Eigen::VectorXd& x_minus, double t,
                             const Eigen::VectorXd& lam_plus, double p) {
  const auto& cm = hs.compiled();
  const bool autonomous = cm.trans(k).has_manifold;
  if (!autonomous && p != 0.0) throw std::invalid_argument("p must be 0 at a controlled switching");
  Eigen::MatrixXd J = hs.jump_jacobian(k, x_minus, t);
  if (J.rows() != lam_plus.size()) throw std::invalid_argument("adjoint dimension does not match jump output");
  Eigen::VectorXd lam = J.transpose() * lam_plus + hs.cost_gradient(k, x_minus, t);
  if (autonomous && p != 0.0) lam += p * cm.manifold_grad(k, x_minus, t);
  return lam;
}

double solve_p_from_hamiltonian_continuity(const HamiltonianSet& hs, std::size_t k, const Eigen::VectorXd& x_minus,
                                           const Eigen::VectorXd& u_minus, double t, const Eigen::VectorXd& lam_plus,
                                           double H_plus, double transversality_eps) {
  const auto& cm = hs.compiled();
  if (!cm.trans(k).has_manifold) throw std::invalid_argument("p is only defined at autonomous switchings");
  const std::size_t q = cm.trans(k).from;
  Eigen::VectorXd f;
  cm.field(q, x_minus, u_minus, t, f);
  const double denom = cm.manifold_grad(k, x_minus, t).dot(f);
  if (!(std::fabs(denom) >= transversality_eps)) {
    throw std::domain_error("transversality denominator below eps");
  }
  Eigen::VectorXd base = adjoint_jump(hs, k, x_minus, t, lam_plus, 0.0);
  const double l = cm.running_cost(q, x_minus, u_minus, t);
  return (H_plus - l - base.dot(f)) / denom;
}

Eigen::VectorXd AdjointTrajectory::at(std::size_t segment, double t) const {
  const auto& s = segments.at(segment);
  double lo = std::min(s.t_begin, s.t_end), hi = std::max(s.t_begin, s.t_end);
  return s.lam(std::clamp(t, lo, hi));
}

AdjointTrajectory integrate_adjoint_backward(const HamiltonianSet& hs, const HybridTrajectory& traj,
                                             const ControlLaw& control, const SimConfig& cfg) {
  const auto& cm = hs.compiled();
  if (cm.model().time_varying) throw std::invalid_argument("adjoint integration needs a time-invariant model");
  if (traj.outcome != Outcome::completed) throw std::invalid_argument("adjoint integration needs a completed trajectory");
  const std::size_t S = traj.segments.size();
  AdjointTrajectory adj;
  adj.segments.resize(S);
  adj.switches.resize(traj.jumps.size());

  Eigen::VectorXd lam = hs.terminal_gradient(traj.final_state(), traj.tf);
  OdeOptions opt = cfg.ode();
  for (std::size_t ii = S; ii-- > 0;) {
    const Segment& seg = traj.segments[ii];
    const std::size_t sid = traj.segment_offset + ii;
    AdjointSegment as;
    as.loc = seg.loc;
    as.t_begin = seg.t_begin;
    as.t_end = seg.t_end;
    if (seg.t_end > seg.t_begin) {
      Rhs rhs = [&](double t, const Eigen::VectorXd& l, Eigen::VectorXd& dl) {
        Eigen::VectorXd x = seg.x(t);
        dl = -hs.state_gradient(seg.loc, x, control(sid, t, x), l, t);
      };
      OdeResult r = integrate(rhs, seg.t_end, lam, seg.t_begin, opt);
      if (!r.y_end.allFinite()) throw std::runtime_error("non-finite adjoint");
      as.lam = std::move(r.dense);
      lam = r.y_end;
    } else {
      as.lam = DenseOutput(static_cast<std::size_t>(lam.size()), seg.t_end);
      DenseOutput::Step st{seg.t_end, 0.0, Eigen::MatrixXd::Zero(lam.size(), 5)};
      st.coef.col(0) = lam;
      as.lam.push(std::move(st));
    }
    adj.segments[ii] = std::move(as);
    if (ii == 0) break;

    // switching between segments ii-1 and ii
    const JumpRecord& jr = traj.jumps[ii - 1];
    const Segment& before = traj.segments[ii - 1];
    SwitchRecord sw;
    sw.t = jr.t;
    sw.transition = jr.transition;
    sw.lam_plus = lam;
    Eigen::VectorXd u_plus = control(sid, jr.t, jr.x_plus);
    Eigen::VectorXd u_minus = control(sid - 1, jr.t, jr.x_minus);
    sw.H_plus = hs.value(seg.loc, jr.x_plus, u_plus, lam, jr.t);
    if (cm.trans(jr.transition).has_manifold) {
      sw.p = solve_p_from_hamiltonian_continuity(hs, jr.transition, jr.x_minus, u_minus, jr.t, lam, sw.H_plus,
                                                 cfg.transversality_eps);
    }
    sw.lam_minus = adjoint_jump(hs, jr.transition, jr.x_minus, jr.t, lam, sw.p);
    sw.H_minus = hs.value(before.loc, jr.x_minus, u_minus, sw.lam_minus, jr.t);
    lam = sw.lam_minus;
    adj.switches[ii - 1] = sw;
  }
  return adj;
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, Expr, std::less<>> shift_map(std::size_t n, std::size_t by, bool time_to_first) {
  std::map<std::string, Expr, std::less<>> m;
  for (std::size_t i = 0; i < n; ++i) m.emplace(state_var(i), Expr::variable(state_var(i + by)));
  if (time_to_first) m.emplace(kTimeVar, Expr::variable(state_var(0)));
  return m;
}

std::size_t max_state_dim(const HybridModel& model) {
  std::size_t n = 0;
  for (const auto& l : model.locations) n = std::max(n, l.state_dim);
  return n;
}

}  // namespace

HybridModel to_mayer(const HybridModel& model) {
  HybridModel out = model;
  for (auto& loc : out.locations) {
    auto sh = shift_map(loc.state_dim, 1, false);
    std::vector<Expr> f{substitute(loc.running_cost, sh)};
    for (const auto& e : loc.field) f.push_back(substitute(e, sh));
    loc.field = std::move(f);
    loc.running_cost = Expr::constant(0.0);
    loc.state_dim += 1;
  }
  for (auto& tr : out.transitions) {
    const std::size_t n = model.location(tr.from).state_dim;
    auto sh = shift_map(n, 1, false);
    std::vector<Expr> xi{Expr::variable(state_var(0)) + substitute(tr.switching_cost, sh)};
    for (const auto& e : tr.jump) xi.push_back(substitute(e, sh));
    tr.jump = std::move(xi);
    if (tr.manifold) tr.manifold = substitute(*tr.manifold, sh);
    tr.switching_cost = Expr::constant(0.0);
  }
  out.terminal_cost =
      Expr::variable(state_var(0)) + substitute(model.terminal_cost, shift_map(max_state_dim(model), 1, false));
  return out;
}

HybridModel to_time_invariant(const HybridModel& model) {
  HybridModel out = model;
  for (auto& loc : out.locations) {
    auto sh = shift_map(loc.state_dim, 1, true);
    std::vector<Expr> f{Expr::constant(1.0)};
    for (const auto& e : loc.field) f.push_back(substitute(e, sh));
    loc.field = std::move(f);
    loc.running_cost = substitute(loc.running_cost, sh);
    loc.state_dim += 1;
  }
  for (auto& tr : out.transitions) {
    const std::size_t n = model.location(tr.from).state_dim;
    auto sh = shift_map(n, 1, true);
    std::vector<Expr> xi{Expr::variable(state_var(0))};
    for (const auto& e : tr.jump) xi.push_back(substitute(e, sh));
    tr.jump = std::move(xi);
    if (tr.manifold) tr.manifold = substitute(*tr.manifold, sh);
    tr.switching_cost = substitute(tr.switching_cost, sh);
  }
  out.terminal_cost = substitute(model.terminal_cost, shift_map(max_state_dim(model), 1, true));
  out.time_varying = false;
  return out;
}

}  // namespace hocp
