#pragma once

#include "hocp/model.hpp"
#include "hocp/ode.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hocp {

struct SimConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double event_tol = 1e-10;
  double transversality_eps = 1e-9;
  /// Unset means 1e-9 * (tf - t0).
  std::optional<double> min_dwell;
  std::size_t max_switches = 64;
  /// A manifold this close to zero at segment start is armed by its rate.
  double manifold_zero_tol = 1e-8;
  double h_max = std::numeric_limits<double>::infinity();

  double dwell(double t0, double tf) const { return min_dwell ? *min_dwell : 1e-9 * (tf - t0); }
  OdeOptions ode() const;
};

/// u(segment, t, x). Segment indices count from the start of the full schedule.
using ControlLaw = std::function<Eigen::VectorXd(std::size_t segment, double t, const Eigen::VectorXd& x)>;

struct HybridInput {
  /// One entry per switch. Controlled switches need a time; autonomous
  /// entries are ignored.
  std::vector<std::optional<double>> switch_times;
  ControlLaw control;
  std::vector<double> breakpoints;
  /// Index of the first segment handed to `control` (restarted runs).
  std::size_t segment_offset = 0;
};

struct InitialState {
  std::string q;
  Eigen::VectorXd x;
};

struct Segment {
  std::size_t loc = 0;
  std::string location;
  double t_begin = 0.0;
  double t_end = 0.0;
  DenseOutput x;
};

struct JumpRecord {
  double t = 0.0;
  std::size_t transition = 0;
  std::string event;
  SwitchKind kind = SwitchKind::controlled;
  Eigen::VectorXd x_minus;
  Eigen::VectorXd x_plus;
};

/// `infeasible`: the dynamics did not realize the schedule (guard never
/// reached, unexpected event, integration or jump failure). `error`: the
/// request itself is inconsistent.
enum class Outcome { completed, manifold_termination, zeno, infeasible, error };

std::string_view to_string(Outcome o);

struct HybridTrajectory {
  double t0 = 0.0;
  double tf = 0.0;
  /// Absolute index of segments[0] within the schedule.
  std::size_t segment_offset = 0;
  std::vector<Segment> segments;
  std::vector<JumpRecord> jumps;
  Outcome outcome = Outcome::error;
  std::string message;
  /// Transition whose guard ended the run (termination, schedule error).
  std::optional<std::size_t> failing_transition;

  std::vector<double> switching_times() const;
  /// Segment containing t; at a switching time the later segment.
  std::size_t segment_at(double t) const;
  Eigen::VectorXd state(double t) const;
  Eigen::VectorXd final_state() const;
};

struct SegmentResult {
  OdeResult ode;
  std::optional<std::size_t> event;  // transition index
  bool termination = false;
  bool simultaneous = false;
};

/// Integrates one location over [t_begin, t_end] watching the manifolds of
/// `active` transitions. A manifold that starts within manifold_zero_tol of
/// zero is armed on the side its rate points to.
SegmentResult integrate_segment(const CompiledModel& cm, std::size_t q, const Eigen::VectorXd& x0,
                                const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& u,
                                double t_begin, double t_end, const std::vector<std::size_t>& active,
                                const SimConfig& cfg, const std::vector<double>& breakpoints = {});

HybridTrajectory run(const CompiledModel& cm, const LocationSchedule& sched, const InitialState& h0,
                     const HybridInput& input, double t0, double tf, const SimConfig& cfg);

struct ReplayReport {
  double jump_residual = 0.0;
  double manifold_residual = 0.0;  // |m(x-)| / (1 + |grad m . f|)
  double ode_residual = 0.0;       // max |x' - f| / (1 + |f|) at mesh midpoints
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Re-evaluates the trajectory invariants.
ReplayReport replay_check(const HybridTrajectory& traj, const CompiledModel& cm, const ControlLaw& control,
                          const SimConfig& cfg, double ode_tol = 1e-6);

/// Bolza cost: running cost integrals, switching costs and terminal cost.
double cost_of(const CompiledModel& cm, const HybridTrajectory& traj, const ControlLaw& control);

}  // namespace hocp
