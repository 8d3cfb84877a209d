#include "hocp/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace hocp {

SensitivityContext::SensitivityContext(const HybridModel& model, const LocationSchedule& sched,
                                       const InitialState& h0, const HybridInput& input, double t0, double tf,
                                       const SimConfig& cfg)
    : sched_(sched), t0_(t0), tf_(tf), cfg_(cfg) {
  if (model.time_varying) throw std::invalid_argument("sensitivity analysis needs a time-invariant model");
  HybridModel mayer = to_mayer(model);
  auto cm = std::make_shared<const CompiledModel>(mayer);
  hs_ = std::make_shared<const HamiltonianSet>(cm);

  for (const auto& loc : mayer.locations) {
    auto layout = location_layout(loc.state_dim, loc.control_dim);
    std::vector<std::vector<Program>> rows;
    for (const auto& f : loc.field) {
      std::vector<Program> row;
      for (std::size_t j = 0; j < loc.state_dim; ++j) row.emplace_back(differentiate(f, state_var(j)), layout);
      rows.push_back(std::move(row));
    }
    jac_.push_back(std::move(rows));
  }

  h0_hat_.q = h0.q;
  h0_hat_.x.resize(h0.x.size() + 1);
  h0_hat_.x << 0.0, h0.x;
  ControlLaw inner = input.control;
  control_hat_ = [inner](std::size_t seg, double t, const Eigen::VectorXd& xh) {
    return inner(seg, t, xh.tail(xh.size() - 1));
  };
  input_hat_ = input;
  input_hat_.control = control_hat_;
  traj_ = run(*cm, sched_, h0_hat_, input_hat_, t0, tf, cfg_);
  if (traj_.outcome != Outcome::completed) {
    throw std::runtime_error("nominal trajectory did not complete: " + traj_.message);
  }
  adjoint_ = integrate_adjoint_backward(*hs_, traj_, control_hat_, cfg_);
}

double SensitivityContext::cost() const { return hs_->compiled().terminal(traj_.final_state(), tf_); }

Eigen::MatrixXd SensitivityContext::field_jacobian(std::size_t q, const Eigen::VectorXd& xh, const Eigen::VectorXd& u,
                                                   double t) const {
  auto v = pack_location(xh, u, t, Eigen::VectorXd());
  const auto& rows = jac_[q];
  Eigen::MatrixXd A(xh.size(), xh.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j](v);
    }
  }
  return A;
}

Eigen::VectorXd SensitivityContext::field(std::size_t q, const Eigen::VectorXd& xh, const Eigen::VectorXd& u,
                                          double t) const {
  Eigen::VectorXd f;
  hs_->compiled().field(q, xh, u, t, f);
  return f;
}

double SensitivityContext::needle_cost(double t, const Eigen::VectorXd& v, double eps) const {
  const std::size_t k = traj_.segment_at(t);
  HybridInput in = input_hat_;
  ControlLaw base = control_hat_;
  in.control = [base, k, t, eps, v](std::size_t seg, double tt, const Eigen::VectorXd& xh) -> Eigen::VectorXd {
    if (seg == k && tt >= t && tt < t + eps) return v;
    return base(seg, tt, xh);
  };
  in.breakpoints.push_back(t);
  in.breakpoints.push_back(t + eps);
  HybridTrajectory tr = run(hs_->compiled(), sched_, h0_hat_, in, t0_, tf_, cfg_);
  if (tr.outcome != Outcome::completed) throw std::runtime_error("needle run did not complete: " + tr.message);
  return hs_->compiled().terminal(tr.final_state(), tf_);
}

VariationRecord propagate_variation(const SensitivityContext& ctx, double t, const Eigen::VectorXd& v) {
  const auto& traj = ctx.trajectory();
  const auto& hs = ctx.hamiltonians();
  const auto& cm = hs.compiled();
  const auto& control = ctx.control();
  const std::size_t J = traj.jumps.size();

  VariationRecord rec;
  rec.t = t;
  rec.v = v;
  rec.segment = traj.segment_at(t);
  rec.mu.assign(J, 0.0);
  rec.gamma.assign(J, 0.0);
  rec.y_minus.assign(J, Eigen::VectorXd());
  rec.y_plus.assign(J, Eigen::VectorXd());

  const Segment& s0 = traj.segments[rec.segment];
  if (!(t > s0.t_begin && t < s0.t_end)) throw std::invalid_argument("needle time must be interior to a segment");
  Eigen::VectorXd xh = s0.x(t);
  Eigen::VectorXd u = control(traj.segment_offset + rec.segment, t, xh);
  if (v.size() != u.size()) throw std::invalid_argument("needle control has the wrong dimension");
  Eigen::VectorXd y = ctx.field(s0.loc, xh, v, t) - ctx.field(s0.loc, xh, u, t);
  rec.y_initial = y;

  OdeOptions opt = ctx.config().ode();
  for (std::size_t i = rec.segment; i < traj.segments.size(); ++i) {
    const Segment& seg = traj.segments[i];
    const double a = i == rec.segment ? t : seg.t_begin;
    const std::size_t sid = traj.segment_offset + i;
    VariationRecord::Piece piece;
    piece.segment = i;
    piece.t_begin = a;
    piece.t_end = seg.t_end;
    if (seg.t_end > a) {
      Rhs rhs = [&](double tt, const Eigen::VectorXd& yy, Eigen::VectorXd& dy) {
        Eigen::VectorXd x = seg.x(tt);
        dy = ctx.field_jacobian(seg.loc, x, control(sid, tt, x), tt) * yy;
      };
      OdeResult r = integrate(rhs, a, y, seg.t_end, opt);
      piece.y = std::move(r.dense);
      y = r.y_end;
    } else {
      piece.y = DenseOutput(static_cast<std::size_t>(y.size()), a);
      DenseOutput::Step st{a, 0.0, Eigen::MatrixXd::Zero(y.size(), 5)};
      st.coef.col(0) = y;
      piece.y.push(std::move(st));
    }
    rec.pieces.push_back(std::move(piece));
    if (i + 1 == traj.segments.size()) break;

    const JumpRecord& jr = traj.jumps[i];
    const std::size_t k = jr.transition;
    rec.y_minus[i] = y;
    Eigen::MatrixXd Xi = hs.jump_jacobian(k, jr.x_minus, jr.t);
    Eigen::VectorXd yp = Xi * y;
    if (cm.trans(k).has_manifold) {
      Eigen::VectorXd um = control(sid, jr.t, jr.x_minus);
      Eigen::VectorXd up = control(sid + 1, jr.t, jr.x_plus);
      Eigen::VectorXd fm = ctx.field(seg.loc, jr.x_minus, um, jr.t);
      Eigen::VectorXd fp = ctx.field(traj.segments[i + 1].loc, jr.x_plus, up, jr.t);
      Eigen::VectorXd gm = cm.manifold_grad(k, jr.x_minus, jr.t);
      const double denom = gm.dot(fm);
      if (!(std::fabs(denom) >= ctx.config().transversality_eps)) {
        throw std::domain_error("transversality denominator below eps");
      }
      rec.mu[i] = gm.dot(y) / denom;
      rec.gamma[i] = 1.0 / denom;
      yp += rec.mu[i] * (fp - Xi * fm);
    }
    rec.y_plus[i] = yp;
    y = yp;
  }
  rec.y_final = y;
  return rec;
}

double first_order_cost_change(const SensitivityContext& ctx, const VariationRecord& rec) {
  const auto& traj = ctx.trajectory();
  return ctx.hamiltonians().terminal_gradient(traj.final_state(), traj.tf).dot(rec.y_final);
}

DualityAudit duality_audit(const SensitivityContext& ctx, const AdjointTrajectory& adjoint,
                           const VariationRecord& rec) {
  const auto& traj = ctx.trajectory();
  if (adjoint.segments.size() != traj.segments.size() || adjoint.switches.size() != traj.jumps.size()) {
    throw std::invalid_argument("adjoint and variation come from different trajectories");
  }
  for (std::size_t j = 0; j < traj.jumps.size(); ++j) {
    if (std::fabs(adjoint.switches[j].t - traj.jumps[j].t) > 1e-9 * (1.0 + std::fabs(traj.jumps[j].t))) {
      throw std::invalid_argument("adjoint and variation come from different trajectories");
    }
  }
  const auto& last = rec.pieces.back();
  const double ref = adjoint.at(last.segment, traj.tf).dot(rec.y_final);
  DualityAudit out;
  out.scale = std::fabs(ref);
  auto check = [&](double value) { out.deviation = std::max(out.deviation, std::fabs(value - ref)); };
  for (const auto& piece : rec.pieces) {
    if (piece.t_end > piece.t_begin) {
      for (double s : piece.y.mesh()) check(adjoint.at(piece.segment, s).dot(piece.y(s)));
    } else {
      check(adjoint.at(piece.segment, piece.t_begin).dot(piece.y(piece.t_begin)));
    }
  }
  for (std::size_t j = rec.segment; j < traj.jumps.size(); ++j) {
    const auto& sw = adjoint.switches[j];
    check(sw.lam_minus.dot(rec.y_minus[j]));
    check(sw.lam_plus.dot(rec.y_plus[j]));
  }
  return out;
}

Eigen::MatrixXd transition_matrix(const SensitivityContext& ctx, std::size_t segment, double t_b, double t_a) {
  const auto& traj = ctx.trajectory();
  const Segment& seg = traj.segments.at(segment);
  const Eigen::Index n = static_cast<Eigen::Index>(seg.x.dim());
  const std::size_t sid = traj.segment_offset + segment;
  const auto& control = ctx.control();
  Eigen::VectorXd phi0 = Eigen::Map<const Eigen::VectorXd>(Eigen::MatrixXd::Identity(n, n).eval().data(), n * n);
  if (t_a == t_b) return Eigen::MatrixXd::Identity(n, n);
  Rhs rhs = [&](double tt, const Eigen::VectorXd& p, Eigen::VectorXd& dp) {
    Eigen::VectorXd x = seg.x(std::clamp(tt, seg.t_begin, seg.t_end));
    Eigen::Map<const Eigen::MatrixXd> P(p.data(), n, n);
    Eigen::MatrixXd D = ctx.field_jacobian(seg.loc, x, control(sid, tt, x), tt) * P;
    dp = Eigen::Map<const Eigen::VectorXd>(D.data(), n * n);
  };
  OdeResult r = integrate(rhs, t_a, phi0, t_b, ctx.config().ode());
  return Eigen::Map<const Eigen::MatrixXd>(r.y_end.data(), n, n);
}

}  // namespace hocp
