#pragma once

#include "hocp/hmp.hpp"
#include "hocp/simulate.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hocp {

class ShootingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multipoint boundary value problem of the minimum principle for a fixed
/// schedule. Time-varying models are solved on their clock-augmented form.
struct ShootingProblem {
  HybridModel model;  // as given
  std::shared_ptr<const HamiltonianSet> hs;  // time-invariant working model
  bool clock = false;                        // working state is [theta, x]
  LocationSchedule schedule;
  std::vector<std::size_t> locs;         // location index per segment
  std::vector<std::size_t> transitions;  // transition index per switch
  InitialState h0;
  Eigen::VectorXd x0;  // working initial state
  double t0 = 0.0;
  double tf = 0.0;
  std::vector<std::optional<double>> pinned;

  struct Slot {
    bool autonomous = false;
    std::optional<std::size_t> time;  // unknown index when free
    std::size_t lam_plus = 0;
    std::size_t lam_dim = 0;
    std::optional<std::size_t> p;
  };
  std::size_t lam0_dim = 0;
  std::vector<Slot> slots;
  std::vector<std::string> unknown_names;
  std::vector<std::string> residual_names;

  std::size_t size() const { return unknown_names.size(); }
  const HybridModel& working_model() const { return hs->compiled().model(); }
  /// Switching times encoded by z (pinned ones filled in).
  std::vector<double> times(const Eigen::VectorXd& z) const;
};

/// Builds the square unknown/residual layout. `pinned` is empty or has one
/// entry per switch; pinning an autonomous switch is an error.
ShootingProblem assemble(const HybridModel& model, const LocationSchedule& sched, const InitialState& h0, double t0,
                         double tf, const std::vector<std::optional<double>>& pinned = {});

inline SimConfig shooting_sim_config() {
  SimConfig c;
  c.rtol = 1e-11;
  c.atol = 1e-13;
  return c;
}

struct SolverConfig {
  SimConfig sim = shooting_sim_config();
  double newton_tol = 1e-8;
  std::size_t max_iterations = 200;
  double fd_step = 1e-6;
  double armijo = 1e-4;
  double min_damping = 1e-10;
  double feasibility_tol = 1e-6;
  /// Standard deviation of random adjoint guesses; default from grad g.
  std::optional<double> adjoint_scale;
  /// Worker threads for multistart; 0 picks the hardware count.
  unsigned threads = 0;
};

struct ResidualRow {
  std::string name;
  double value = 0.0;
};

struct SolveReport {
  bool converged = false;
  std::size_t iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  Eigen::VectorXd unknowns;
  std::vector<std::string> unknown_names;
  std::vector<ResidualRow> residuals;
  double cost = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> switch_times;
  std::vector<double> multipliers;  // p per switch, 0 when controlled
  /// Jointly integrated state and adjoint in working coordinates.
  HybridTrajectory trajectory;
  AdjointTrajectory adjoint;
  /// Open-loop control u(t) = argmin H along the joint solution.
  ControlLaw control;
  /// Event-detected replay of `control` on the working model.
  std::optional<HybridTrajectory> validation;
  double validation_gap = std::numeric_limits<double>::infinity();
  /// The replay completed and reproduced every switching time to
  /// feasibility_tol: the guards are met at their first crossing.
  bool feasible = false;
  std::string message;
  std::optional<std::size_t> start;
};

/// Residual vector at z. Throws ShootingError when propagation fails.
Eigen::VectorXd shooting_residual(const ShootingProblem& prob, const Eigen::VectorXd& z, const SolverConfig& cfg = {});

/// Damped Newton from `guess`. Throws std::invalid_argument when the guess
/// violates time ordering or has the wrong size.
SolveReport shoot(const ShootingProblem& prob, const Eigen::VectorXd& guess, const SolverConfig& cfg = {});

/// Evaluates the full report (trajectory, adjoint, cost) at z without iterating.
SolveReport evaluate(const ShootingProblem& prob, const Eigen::VectorXd& z, const SolverConfig& cfg = {});

struct MultistartResult {
  std::vector<SolveReport> reports;
  /// Lowest-cost converged and feasible report.
  std::optional<std::size_t> best;
  /// Throws ShootingError when no start converged.
  const SolveReport& best_report() const;
};

/// Seeded starting guesses: even starts are seeded from a simulated
/// trajectory and its adjoint, odd starts draw adjoints from a centered normal.
std::vector<Eigen::VectorXd> starting_guesses(const ShootingProblem& prob, std::size_t n_starts, std::uint64_t seed,
                                              const SolverConfig& cfg = {});

MultistartResult multistart(const ShootingProblem& prob, std::size_t n_starts, std::uint64_t seed,
                            const SolverConfig& cfg = {});

}  // namespace hocp
