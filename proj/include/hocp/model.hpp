#pragma once

#include "hocp/expr.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hocp {

inline constexpr std::size_t kMaxStateDim = 64;

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class SwitchKind { autonomous, controlled };

std::string_view to_string(SwitchKind k);

/// Expressions in a location use the variables x1..xn, u1..um and t.
struct Location {
  std::string id;
  std::size_t state_dim = 1;
  std::size_t control_dim = 1;
  std::vector<Interval> control_box;
  std::vector<Expr> field;
  Expr running_cost;
};

/// Jump, switching cost and manifold are expressions over the source
/// location's x1..xn and t.
struct Transition {
  std::string event;
  std::string from;
  std::string to;
  SwitchKind kind = SwitchKind::controlled;
  std::optional<Expr> manifold;
  std::vector<Expr> jump;
  Expr switching_cost;
};

struct HybridModel {
  std::vector<Location> locations;
  std::vector<Transition> transitions;
  /// Over the final location's x1..xn and t.
  Expr terminal_cost;
  bool time_varying = false;

  std::optional<std::size_t> location_index(std::string_view id) const;
  const Location& location(std::string_view id) const;
  std::optional<std::size_t> transition_index(std::string_view from, std::string_view to, SwitchKind kind) const;
  /// Autonomous transitions leaving `from`.
  std::vector<std::size_t> autonomous_out(std::string_view from) const;
};

struct LocationSchedule {
  std::vector<std::string> locations;
  std::vector<SwitchKind> kinds;  // one per switch
  std::size_t switches() const { return kinds.size(); }
};

struct Issue {
  std::string path;
  std::string message;
};
using ValidationReport = std::vector<Issue>;

ValidationReport validate(const HybridModel& model);

/// True iff each consecutive pair is a declared transition of the given kind.
/// Throws std::invalid_argument on an unknown location or a kinds/locations
/// length mismatch.
bool schedule_check(const HybridModel& model, const LocationSchedule& sched);

/// Resolves the transition index for every switch of a feasible schedule.
std::vector<std::size_t> schedule_transitions(const HybridModel& model, const LocationSchedule& sched);

// Variable naming shared by every module.
std::string state_var(std::size_t i);    // x{i+1}
std::string control_var(std::size_t i);  // u{i+1}
std::string adjoint_var(std::size_t i);  // lam{i+1}
inline constexpr const char* kTimeVar = "t";

/// [x1..xn, u1..um, t, lam1..lamn]: the evaluation layout for location functions.
std::vector<std::string> location_layout(std::size_t n, std::size_t m);
/// [x1..xn, t]: the evaluation layout for jumps, manifolds and costs.
std::vector<std::string> state_layout(std::size_t n);

VarSet location_vars(std::size_t n, std::size_t m, bool with_adjoint = false);
VarSet state_vars(std::size_t n);

/// Compiled forms of the model functions and the derivatives the simulator
/// needs. Immutable and shareable.
class CompiledModel {
 public:
  struct Loc {
    std::size_t n = 0, m = 0;
    std::vector<Program> field;
    Program running_cost;
  };
  struct Trans {
    std::size_t from = 0, to = 0;
    std::vector<Program> jump;
    Program cost;
    bool has_manifold = false;
    Program manifold;
    std::vector<Program> manifold_grad;  // d m / d x_i
    Program manifold_dt;
  };

  explicit CompiledModel(const HybridModel& model);

  const HybridModel& model() const { return *model_; }
  const Loc& loc(std::size_t i) const { return locs_[i]; }
  const Trans& trans(std::size_t i) const { return trans_[i]; }
  const Program& terminal_cost() const { return terminal_; }

  /// f_q(x, u, t).
  void field(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t, Eigen::VectorXd& out) const;
  double running_cost(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) const;
  Eigen::VectorXd jump(std::size_t k, const Eigen::VectorXd& x, double t) const;
  double switching_cost(std::size_t k, const Eigen::VectorXd& x, double t) const;
  double manifold(std::size_t k, const Eigen::VectorXd& x, double t) const;
  Eigen::VectorXd manifold_grad(std::size_t k, const Eigen::VectorXd& x, double t) const;
  double manifold_dt(std::size_t k, const Eigen::VectorXd& x, double t) const;
  /// Terminal cost; its variable set is that of the final location.
  double terminal(const Eigen::VectorXd& x, double t) const;

 private:
  std::shared_ptr<const HybridModel> model_;
  std::vector<Loc> locs_;
  std::vector<Trans> trans_;
  Program terminal_;  // layout [t, x1..x_nmax]
  std::size_t max_dim_ = 0;
};

/// Packs [x, t] into a scratch buffer laid out for state-level programs.
std::vector<double> pack_state(const Eigen::VectorXd& x, double t);
/// Packs [x, u, t, lam] for location-level programs.
std::vector<double> pack_location(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t,
                                  const Eigen::VectorXd& lam);

}  // namespace hocp
