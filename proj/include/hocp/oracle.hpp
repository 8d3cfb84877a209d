#pragma once

#include "hocp/model.hpp"
#include "hocp/simulate.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hocp {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  std::size_t nodes = 11;
  std::size_t budget = 10000;  // objective evaluations
  std::uint64_t seed = 0;
  SimConfig sim;
  /// Gradient polish after every this many coordinate sweeps.
  std::size_t polish_every = 1;
  /// Random feasible restarts tried when the box-center guess fails.
  std::size_t init_attempts = 64;
};

struct TraceRow {
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
  double cost = 0.0;
  double step = 0.0;
};

/// Piecewise-linear controls: every segment owns an N-node table per control
/// component laid over the block between the surrounding controlled switching
/// times (or t0, tf). Autonomous switching times are left to the simulator.
class DirectParameterization {
 public:
  DirectParameterization(const HybridModel& model, const LocationSchedule& sched, double t0, double tf,
                         std::size_t nodes);

  std::size_t size() const { return size_; }
  std::size_t nodes() const { return nodes_; }
  /// Indices of the controlled switching times within the parameter vector.
  const std::vector<std::size_t>& time_indices() const { return time_index_; }
  double lower(std::size_t i) const { return lo_[i]; }
  double upper(std::size_t i) const { return hi_[i]; }

  /// Box centers and evenly spread controlled times.
  Eigen::VectorXd initial() const;
  /// Clamps node values into the boxes and times into [t0, tf].
  Eigen::VectorXd project(const Eigen::VectorXd& p) const;
  /// False when the controlled times are not increasing inside (t0, tf).
  bool ordered(const Eigen::VectorXd& p) const;

  HybridInput input(const Eigen::VectorXd& p) const;

 private:
  struct Table {
    std::size_t block = 0;
    std::size_t offset = 0;  // first parameter
    std::size_t m = 0;
  };
  std::vector<Table> tables_;  // per segment
  std::vector<std::optional<std::size_t>> switch_param_;  // per switch
  std::vector<std::size_t> time_index_;
  std::vector<double> lo_, hi_;
  std::size_t nodes_ = 0, size_ = 0;
  double t0_ = 0.0, tf_ = 0.0;
};

struct OracleResult {
  double cost = 0.0;
  Eigen::VectorXd params;
  bool unoptimized = false;
  std::size_t evaluations = 0;
  std::vector<TraceRow> trace;
  std::vector<double> switch_times;
  HybridTrajectory trajectory;
  ControlLaw control;
};

/// Direct search on the Bolza cost. Infeasible simulations score +inf.
/// Throws OracleError when no evaluated input is feasible.
OracleResult optimize(const HybridModel& model, const LocationSchedule& sched, const InitialState& h0, double t0,
                      double tf, const OracleOptions& opt = {});

/// J_indirect <= J_direct * (1 + rtol).
bool refine_check(double j_indirect, double j_direct, double rtol);

}  // namespace hocp
