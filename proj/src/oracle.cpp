#include "hocp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hocp {

DirectParameterization::DirectParameterization(const HybridModel& model, const LocationSchedule& sched, double t0,
                                               double tf, std::size_t nodes)
    : nodes_(nodes), t0_(t0), tf_(tf) {
  if (nodes < 3) throw std::invalid_argument("need at least 3 control nodes");
  if (!(t0 < tf)) throw std::invalid_argument("need t0 < tf");
  if (!schedule_check(model, sched)) throw std::invalid_argument("schedule is not a path of the automaton");
  std::size_t block = 0;
  for (std::size_t i = 0; i < sched.locations.size(); ++i) {
    const Location& loc = model.location(sched.locations[i]);
    Table tb{block, lo_.size(), loc.control_dim};
    for (std::size_t c = 0; c < loc.control_dim; ++c) {
      for (std::size_t k = 0; k < nodes; ++k) {
        lo_.push_back(loc.control_box[c].lo);
        hi_.push_back(loc.control_box[c].hi);
      }
    }
    tables_.push_back(tb);
    if (i < sched.switches()) {
      switch_param_.emplace_back(std::nullopt);  // controlled ones filled below
      if (sched.kinds[i] == SwitchKind::controlled) ++block;
    }
  }
  for (std::size_t j = 0; j < sched.switches(); ++j) {
    if (sched.kinds[j] != SwitchKind::controlled) continue;
    switch_param_[j] = lo_.size();
    time_index_.push_back(lo_.size());
    lo_.push_back(t0);
    hi_.push_back(tf);
  }
  size_ = lo_.size();
}

Eigen::VectorXd DirectParameterization::initial() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(size_));
  for (std::size_t i = 0; i < size_; ++i) p(static_cast<Eigen::Index>(i)) = 0.5 * (lo_[i] + hi_[i]);
  const std::size_t L = switch_param_.size();
  for (std::size_t j = 0; j < L; ++j) {
    if (switch_param_[j]) {
      p(static_cast<Eigen::Index>(*switch_param_[j])) =
          t0_ + static_cast<double>(j + 1) * (tf_ - t0_) / static_cast<double>(L + 1);
    }
  }
  return p;
}

Eigen::VectorXd DirectParameterization::project(const Eigen::VectorXd& p) const {
  Eigen::VectorXd q = p;
  for (std::size_t i = 0; i < size_; ++i) {
    q(static_cast<Eigen::Index>(i)) = std::clamp(q(static_cast<Eigen::Index>(i)), lo_[i], hi_[i]);
  }
  return q;
}

bool DirectParameterization::ordered(const Eigen::VectorXd& p) const {
  double prev = t0_;
  for (std::size_t idx : time_index_) {
    const double t = p(static_cast<Eigen::Index>(idx));
    if (!(t > prev)) return false;
    prev = t;
  }
  return prev < tf_;
}

HybridInput DirectParameterization::input(const Eigen::VectorXd& p) const {
  std::vector<double> edges{t0_};
  for (std::size_t idx : time_index_) edges.push_back(p(static_cast<Eigen::Index>(idx)));
  edges.push_back(tf_);

  HybridInput in;
  for (const auto& sp : switch_param_) {
    if (sp) {
      in.switch_times.emplace_back(p(static_cast<Eigen::Index>(*sp)));
    } else {
      in.switch_times.emplace_back(std::nullopt);
    }
  }
  const std::size_t N = nodes_;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    for (std::size_t k = 1; k + 1 < N; ++k) {
      in.breakpoints.push_back(edges[b] + static_cast<double>(k) * (edges[b + 1] - edges[b]) / static_cast<double>(N - 1));
    }
  }
  in.control = [tables = tables_, edges, p, N](std::size_t seg, double t, const Eigen::VectorXd&) {
    const Table& tb = tables[std::min(seg, tables.size() - 1)];
    const double a = edges[tb.block], b = edges[tb.block + 1];
    const double s = b > a ? std::clamp((t - a) / (b - a), 0.0, 1.0) * static_cast<double>(N - 1) : 0.0;
    const std::size_t k = std::min(static_cast<std::size_t>(s), N - 2);
    const double w = s - static_cast<double>(k);
    Eigen::VectorXd u(static_cast<Eigen::Index>(tb.m));
    for (std::size_t c = 0; c < tb.m; ++c) {
      const Eigen::Index base = static_cast<Eigen::Index>(tb.offset + c * N + k);
      u(static_cast<Eigen::Index>(c)) = (1.0 - w) * p(base) + w * p(base + 1);
    }
    return u;
  };
  return in;
}

namespace {

class Objective {
 public:
  Objective(const CompiledModel& cm, const LocationSchedule& sched, const InitialState& h0, double t0, double tf,
            const DirectParameterization& par, const SimConfig& sim, std::size_t budget)
      : cm_(cm), sched_(sched), h0_(h0), t0_(t0), tf_(tf), par_(par), sim_(sim), budget_(budget) {}

  bool exhausted() const { return count_ >= budget_; }
  std::size_t count() const { return count_; }
  double best() const { return best_; }
  const Eigen::VectorXd& best_params() const { return best_p_; }

  double operator()(const Eigen::VectorXd& p, bool counted = true) {
    if (counted) ++count_;
    double J = std::numeric_limits<double>::infinity();
    if (par_.ordered(p)) {
      try {
        HybridInput in = par_.input(p);
        HybridTrajectory tr = run(cm_, sched_, h0_, in, t0_, tf_, sim_);
        if (tr.outcome == Outcome::completed) J = cost_of(cm_, tr, in.control);
      } catch (const std::exception&) {
      }
      if (!std::isfinite(J)) J = std::numeric_limits<double>::infinity();
    }
    if (J < best_) {
      best_ = J;
      best_p_ = p;
    }
    return J;
  }

 private:
  const CompiledModel& cm_;
  const LocationSchedule& sched_;
  const InitialState& h0_;
  double t0_, tf_;
  const DirectParameterization& par_;
  SimConfig sim_;
  std::size_t budget_;
  std::size_t count_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p_;
};

}  // namespace

OracleResult optimize(const HybridModel& model, const LocationSchedule& sched, const InitialState& h0, double t0,
                      double tf, const OracleOptions& opt) {
  const DirectParameterization par(model, sched, t0, tf, opt.nodes);
  const CompiledModel cm(model);
  Objective obj(cm, sched, h0, t0, tf, par, opt.sim, opt.budget);
  const std::size_t P = par.size();

  OracleResult res;
  Eigen::VectorXd p = par.initial();
  double J = obj(p, false);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t a = 0; !std::isfinite(J) && a < opt.init_attempts && !obj.exhausted(); ++a) {
    // random constant control per segment, controlled times kept evenly spread
    Eigen::VectorXd q = par.initial();
    for (std::size_t i = 0; i < P;) {
      if (std::find(par.time_indices().begin(), par.time_indices().end(), i) != par.time_indices().end()) {
        ++i;
        continue;
      }
      const double v = par.lower(i) + unif(rng) * (par.upper(i) - par.lower(i));
      for (std::size_t k = 0; k < par.nodes(); ++k, ++i) q(static_cast<Eigen::Index>(i)) = v;
    }
    J = obj(q);
    if (std::isfinite(J)) p = q;
  }
  if (!std::isfinite(J)) throw OracleError("no feasible input found");

  res.unoptimized = opt.budget == 0;
  std::vector<double> step(P);
  for (std::size_t i = 0; i < P; ++i) step[i] = 0.25 * (par.upper(i) - par.lower(i));
  for (std::size_t i : par.time_indices()) step[i] = 0.05 * (tf - t0);
  auto max_step = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < P; ++i) m = std::max(m, step[i] / std::max(1.0, par.upper(i) - par.lower(i)));
    return m;
  };
  res.trace.push_back({0, obj.count(), J, max_step()});

  std::size_t sweep = 0;
  while (!obj.exhausted() && max_step() > 1e-10) {
    ++sweep;
    for (std::size_t i = 0; i < P && !obj.exhausted(); ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      bool improved = false;
      for (double dir : {1.0, -1.0}) {
        Eigen::VectorXd q = p;
        q(ii) = std::clamp(q(ii) + dir * step[i], par.lower(i), par.upper(i));
        if (q(ii) == p(ii) || obj.exhausted()) continue;
        const double Jq = obj(q);
        if (Jq < J) {
          p = q;
          J = Jq;
          improved = true;
          break;
        }
      }
      step[i] = improved ? std::min(2.0 * step[i], par.upper(i) - par.lower(i)) : 0.5 * step[i];
    }

    if (opt.polish_every > 0 && sweep % opt.polish_every == 0 && !obj.exhausted()) {
      // forward-difference gradient, projected backtracking along -g
      Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
      bool ok = true;
      for (std::size_t i = 0; i < P && ok; ++i) {
        if (obj.exhausted()) {
          ok = false;
          break;
        }
        const Eigen::Index ii = static_cast<Eigen::Index>(i);
        const double h = 1e-7 * std::max(1.0, par.upper(i) - par.lower(i));
        Eigen::VectorXd q = p;
        const bool back = q(ii) + h > par.upper(i);
        q(ii) += back ? -h : h;
        const double Jq = obj(q);
        if (!std::isfinite(Jq)) {
          ok = false;
          break;
        }
        g(ii) = back ? (J - Jq) / h : (Jq - J) / h;
      }
      if (ok && g.norm() > 0.0) {
        double alpha = 1.0;
        for (int k = 0; k < 30 && !obj.exhausted(); ++k, alpha *= 0.5) {
          Eigen::VectorXd q = par.project(p - alpha * g);
          const double Jq = obj(q);
          if (Jq < J - 1e-4 * g.dot(p - q)) {
            p = q;
            J = Jq;
            break;
          }
        }
      }
    }
    res.trace.push_back({sweep, obj.count(), J, max_step()});
  }

  // the best point ever evaluated may come from a probe
  if (obj.best() < J) {
    p = obj.best_params();
    J = obj.best();
  }
  res.cost = J;
  res.params = p;
  res.evaluations = obj.count();
  HybridInput in = par.input(p);
  res.control = in.control;
  res.trajectory = run(cm, sched, h0, in, t0, tf, opt.sim);
  res.switch_times = res.trajectory.switching_times();
  return res;
}

bool refine_check(double j_indirect, double j_direct, double rtol) { return j_indirect <= j_direct * (1.0 + rtol); }

}  // namespace hocp
