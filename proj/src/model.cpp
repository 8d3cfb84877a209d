#include "hocp/model.hpp"

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

namespace hocp {

std::string_view to_string(SwitchKind k) { return k == SwitchKind::autonomous ? "autonomous" : "controlled"; }

std::optional<std::size_t> HybridModel::location_index(std::string_view id) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].id == id) return i;
  }
  return std::nullopt;
}

const Location& HybridModel::location(std::string_view id) const {
  auto i = location_index(id);
  if (!i) throw std::invalid_argument("unknown location '" + std::string(id) + "'");
  return locations[*i];
}

std::optional<std::size_t> HybridModel::transition_index(std::string_view from, std::string_view to,
                                                         SwitchKind kind) const {
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& tr = transitions[i];
    if (tr.from == from && tr.to == to && tr.kind == kind) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> HybridModel::autonomous_out(std::string_view from) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].from == from && transitions[i].kind == SwitchKind::autonomous) out.push_back(i);
  }
  return out;
}

std::string state_var(std::size_t i) { return "x" + std::to_string(i + 1); }
std::string control_var(std::size_t i) { return "u" + std::to_string(i + 1); }
std::string adjoint_var(std::size_t i) { return "lam" + std::to_string(i + 1); }

std::vector<std::string> location_layout(std::size_t n, std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(state_var(i));
  for (std::size_t i = 0; i < m; ++i) out.push_back(control_var(i));
  out.push_back(kTimeVar);
  for (std::size_t i = 0; i < n; ++i) out.push_back(adjoint_var(i));
  return out;
}

std::vector<std::string> state_layout(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(state_var(i));
  out.push_back(kTimeVar);
  return out;
}

VarSet location_vars(std::size_t n, std::size_t m, bool with_adjoint) {
  VarSet out;
  for (std::size_t i = 0; i < n; ++i) out.insert(state_var(i));
  for (std::size_t i = 0; i < m; ++i) out.insert(control_var(i));
  out.insert(kTimeVar);
  if (with_adjoint) {
    for (std::size_t i = 0; i < n; ++i) out.insert(adjoint_var(i));
  }
  return out;
}

VarSet state_vars(std::size_t n) {
  VarSet out;
  for (std::size_t i = 0; i < n; ++i) out.insert(state_var(i));
  out.insert(kTimeVar);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_vars(const Expr& e, const VarSet& allowed, bool time_varying, const std::string& path,
                ValidationReport& report) {
  for (const auto& v : variables(e)) {
    if (v == kTimeVar && !time_varying) {
      report.push_back({path, "references t but the model is not flagged time_varying"});
    } else if (!allowed.contains(v)) {
      report.push_back({path, "undeclared variable '" + v + "'"});
    }
  }
}

}  // namespace

ValidationReport validate(const HybridModel& model) {
  ValidationReport report;
  std::set<std::string> ids;
  std::size_t max_dim = 0;
  if (model.locations.empty()) report.push_back({"locations", "model has no locations"});

  for (std::size_t i = 0; i < model.locations.size(); ++i) {
    const auto& loc = model.locations[i];
    const std::string p = "locations[" + std::to_string(i) + "]";
    if (loc.id.empty()) report.push_back({p + ".id", "empty location id"});
    if (!ids.insert(loc.id).second) report.push_back({p + ".id", "duplicate location id '" + loc.id + "'"});
    if (loc.state_dim == 0 || loc.state_dim > kMaxStateDim) {
      report.push_back({p + ".state_dim", "state dimension must be in [1, " + std::to_string(kMaxStateDim) + "]"});
    }
    if (loc.control_dim == 0) report.push_back({p + ".control_dim", "control dimension must be positive"});
    max_dim = std::max(max_dim, loc.state_dim);
    if (loc.control_box.size() != loc.control_dim) {
      report.push_back({p + ".control_box", "expected " + std::to_string(loc.control_dim) + " intervals, got " +
                                                std::to_string(loc.control_box.size())});
    }
    for (std::size_t j = 0; j < loc.control_box.size(); ++j) {
      const auto& iv = loc.control_box[j];
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
        report.push_back({p + ".control_box[" + std::to_string(j) + "]", "interval must be finite with lo <= hi"});
      }
    }
    if (loc.field.size() != loc.state_dim) {
      report.push_back({p + ".f", "expected " + std::to_string(loc.state_dim) + " components, got " +
                                      std::to_string(loc.field.size())});
    }
    VarSet allowed = location_vars(loc.state_dim, loc.control_dim);
    for (std::size_t j = 0; j < loc.field.size(); ++j) {
      check_vars(loc.field[j], allowed, model.time_varying, p + ".f[" + std::to_string(j) + "]", report);
    }
    check_vars(loc.running_cost, allowed, model.time_varying, p + ".l", report);
  }

  std::set<std::string> events;
  std::set<std::tuple<std::string, std::string, SwitchKind>> edges;
  for (std::size_t i = 0; i < model.transitions.size(); ++i) {
    const auto& tr = model.transitions[i];
    const std::string p = "transitions[" + std::to_string(i) + "]";
    if (tr.event.empty()) report.push_back({p + ".sigma", "empty event symbol"});
    if (!events.insert(tr.event).second) report.push_back({p + ".sigma", "duplicate event '" + tr.event + "'"});
    if (!edges.insert({tr.from, tr.to, tr.kind}).second) {
      report.push_back({p, "duplicate " + std::string(to_string(tr.kind)) + " transition " + tr.from + " -> " + tr.to});
    }
    auto from = model.location_index(tr.from);
    auto to = model.location_index(tr.to);
    if (!from) report.push_back({p + ".from", "unknown location '" + tr.from + "'"});
    if (!to) report.push_back({p + ".to", "unknown location '" + tr.to + "'"});
    if (tr.kind == SwitchKind::autonomous && !tr.manifold) {
      report.push_back({p + ".m", "autonomous transition requires a manifold"});
    }
    if (tr.kind == SwitchKind::controlled && tr.manifold) {
      report.push_back({p + ".m", "controlled transition must not carry a manifold"});
    }
    if (to && tr.jump.size() != model.locations[*to].state_dim) {
      report.push_back({p + ".xi", "jump has " + std::to_string(tr.jump.size()) + " components but '" + tr.to +
                                       "' has state dimension " + std::to_string(model.locations[*to].state_dim)});
    }
    if (from) {
      VarSet allowed = state_vars(model.locations[*from].state_dim);
      for (std::size_t j = 0; j < tr.jump.size(); ++j) {
        check_vars(tr.jump[j], allowed, model.time_varying, p + ".xi[" + std::to_string(j) + "]", report);
      }
      check_vars(tr.switching_cost, allowed, model.time_varying, p + ".c", report);
      if (tr.manifold) check_vars(*tr.manifold, allowed, model.time_varying, p + ".m", report);
    }
  }

  check_vars(model.terminal_cost, state_vars(max_dim), model.time_varying, "terminal.g", report);
  return report;
}

bool schedule_check(const HybridModel& model, const LocationSchedule& sched) {
  if (sched.locations.empty()) throw std::invalid_argument("empty schedule");
  if (sched.kinds.size() + 1 != sched.locations.size()) {
    throw std::invalid_argument("schedule has " + std::to_string(sched.locations.size()) + " locations but " +
                                std::to_string(sched.kinds.size()) + " switch kinds");
  }
  for (const auto& q : sched.locations) {
    if (!model.location_index(q)) throw std::invalid_argument("unknown location '" + q + "'");
  }
  for (std::size_t j = 0; j < sched.kinds.size(); ++j) {
    if (!model.transition_index(sched.locations[j], sched.locations[j + 1], sched.kinds[j])) return false;
  }
  return true;
}

std::vector<std::size_t> schedule_transitions(const HybridModel& model, const LocationSchedule& sched) {
  if (!schedule_check(model, sched)) throw std::invalid_argument("schedule is not feasible for the automaton");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < sched.kinds.size(); ++j) {
    out.push_back(*model.transition_index(sched.locations[j], sched.locations[j + 1], sched.kinds[j]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> pack_state(const Eigen::VectorXd& x, double t) {
  std::vector<double> v(static_cast<std::size_t>(x.size()) + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) v[static_cast<std::size_t>(i)] = x[i];
  v.back() = t;
  return v;
}

std::vector<double> pack_location(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
                                  const Eigen::VectorXd& lam) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(2 * x.size() + u.size() + 1));
  for (Eigen::Index i = 0; i < x.size(); ++i) v.push_back(x[i]);
  for (Eigen::Index i = 0; i < u.size(); ++i) v.push_back(u[i]);
  v.push_back(t);
  for (Eigen::Index i = 0; i < x.size(); ++i) v.push_back(lam.size() ? lam[i] : 0.0);
  return v;
}

CompiledModel::CompiledModel(const HybridModel& model) : model_(std::make_shared<const HybridModel>(model)) {
  for (const auto& loc : model_->locations) {
    Loc c;
    c.n = loc.state_dim;
    c.m = loc.control_dim;
    auto layout = location_layout(c.n, c.m);
    for (const auto& f : loc.field) c.field.emplace_back(f, layout);
    c.running_cost = Program(loc.running_cost, layout);
    max_dim_ = std::max(max_dim_, c.n);
    locs_.push_back(std::move(c));
  }
  for (const auto& tr : model_->transitions) {
    Trans c;
    c.from = *model_->location_index(tr.from);
    c.to = *model_->location_index(tr.to);
    const std::size_t n = locs_[c.from].n;
    auto layout = state_layout(n);
    for (const auto& e : tr.jump) c.jump.emplace_back(e, layout);
    c.cost = Program(tr.switching_cost, layout);
    if (tr.manifold) {
      c.has_manifold = true;
      c.manifold = Program(*tr.manifold, layout);
      for (std::size_t i = 0; i < n; ++i) c.manifold_grad.emplace_back(differentiate(*tr.manifold, state_var(i)), layout);
      c.manifold_dt = Program(differentiate(*tr.manifold, kTimeVar), layout);
    }
    trans_.push_back(std::move(c));
  }
  std::vector<std::string> tl{kTimeVar};
  for (std::size_t i = 0; i < max_dim_; ++i) tl.push_back(state_var(i));
  terminal_ = Program(model_->terminal_cost, tl);
}

void CompiledModel::field(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
                          Eigen::VectorXd& out) const {
  const Loc& c = locs_[q];
  std::array<double, 2 * kMaxStateDim + 33> buf{};
  std::vector<double> big;
  double* v = buf.data();
  const std::size_t need = 2 * c.n + c.m + 1;
  if (need > buf.size()) {
    big.resize(need);
    v = big.data();
  }
  for (std::size_t i = 0; i < c.n; ++i) v[i] = x[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < c.m; ++i) v[c.n + i] = u[static_cast<Eigen::Index>(i)];
  v[c.n + c.m] = t;
  out.resize(static_cast<Eigen::Index>(c.n));
  std::span<const double> s(v, need);
  for (std::size_t i = 0; i < c.n; ++i) out[static_cast<Eigen::Index>(i)] = c.field[i](s);
}

double CompiledModel::running_cost(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   double t) const {
  return locs_[q].running_cost(pack_location(x, u, t, Eigen::VectorXd()));
}

Eigen::VectorXd CompiledModel::jump(std::size_t k, const Eigen::VectorXd& x, double t) const {
  const Trans& c = trans_[k];
  auto v = pack_state(x, t);
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.jump.size()));
  for (std::size_t i = 0; i < c.jump.size(); ++i) out[static_cast<Eigen::Index>(i)] = c.jump[i](v);
  return out;
}

double CompiledModel::switching_cost(std::size_t k, const Eigen::VectorXd& x, double t) const {
  return trans_[k].cost(pack_state(x, t));
}

double CompiledModel::manifold(std::size_t k, const Eigen::VectorXd& x, double t) const {
  return trans_[k].manifold(pack_state(x, t));
}

Eigen::VectorXd CompiledModel::manifold_grad(std::size_t k, const Eigen::VectorXd& x, double t) const {
  const Trans& c = trans_[k];
  auto v = pack_state(x, t);
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.manifold_grad.size()));
  for (std::size_t i = 0; i < c.manifold_grad.size(); ++i) out[static_cast<Eigen::Index>(i)] = c.manifold_grad[i](v);
  return out;
}

double CompiledModel::manifold_dt(std::size_t k, const Eigen::VectorXd& x, double t) const {
  return trans_[k].manifold_dt(pack_state(x, t));
}

double CompiledModel::terminal(const Eigen::VectorXd& x, double t) const {
  std::vector<double> v(max_dim_ + 1, 0.0);
  v[0] = t;
  for (Eigen::Index i = 0; i < x.size() && static_cast<std::size_t>(i) < max_dim_; ++i) {
    v[static_cast<std::size_t>(i) + 1] = x[i];
  }
  return terminal_(v);
}

}  // namespace hocp
