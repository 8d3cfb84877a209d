#pragma once

#include "hocp/hmp.hpp"
#include "hocp/simulate.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace hocp {

/// A fixed hybrid input replayed on the Mayer-augmented model (leading cost
/// state z). All variational quantities live in this hat space.
class SensitivityContext {
 public:
  /// `model` must be time invariant; `input.control` sees original-space x.
  SensitivityContext(const HybridModel& model, const LocationSchedule& sched, const InitialState& h0,
                     const HybridInput& input, double t0, double tf, const SimConfig& cfg = {});

  const HybridModel& mayer_model() const { return hs_->compiled().model(); }
  const HamiltonianSet& hamiltonians() const { return *hs_; }
  const HybridTrajectory& trajectory() const { return traj_; }
  const ControlLaw& control() const { return control_hat_; }
  const SimConfig& config() const { return cfg_; }
  /// z(tf) + g(x(tf)).
  double cost() const;
  /// Adjoint of the Mayer problem; its leading component is the cost multiplier.
  const AdjointTrajectory& adjoint() const { return adjoint_; }

  /// d f^ / d x^ at (x^, u, t) in location q.
  Eigen::MatrixXd field_jacobian(std::size_t q, const Eigen::VectorXd& xh, const Eigen::VectorXd& u, double t) const;
  Eigen::VectorXd field(std::size_t q, const Eigen::VectorXd& xh, const Eigen::VectorXd& u, double t) const;

  /// Cost of the needle-perturbed input (v on [t, t + eps)).
  double needle_cost(double t, const Eigen::VectorXd& v, double eps) const;

 private:
  LocationSchedule sched_;
  InitialState h0_hat_;
  HybridInput input_hat_;
  double t0_, tf_;
  SimConfig cfg_;
  std::shared_ptr<const HamiltonianSet> hs_;
  std::vector<std::vector<std::vector<Program>>> jac_;  // [loc][i][j]
  ControlLaw control_hat_;
  HybridTrajectory traj_;
  AdjointTrajectory adjoint_;
};

struct VariationRecord {
  double t = 0.0;
  Eigen::VectorXd v;
  std::size_t segment = 0;
  struct Piece {
    std::size_t segment = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    DenseOutput y;
  };
  std::vector<Piece> pieces;
  /// Per switching of the trajectory; zero for switchings before t.
  std::vector<double> mu;
  std::vector<double> gamma;
  std::vector<Eigen::VectorXd> y_minus;
  std::vector<Eigen::VectorXd> y_plus;
  Eigen::VectorXd y_initial;
  Eigen::VectorXd y_final;
};

/// Needle variation at a Lebesgue time t with needle value v.
VariationRecord propagate_variation(const SensitivityContext& ctx, double t, const Eigen::VectorXd& v);

/// grad(g^)^T y(tf): the first-order cost change per unit needle width.
double first_order_cost_change(const SensitivityContext& ctx, const VariationRecord& rec);

struct DualityAudit {
  double deviation = 0.0;
  double scale = 0.0;  // |lam^(tf)^T y(tf)|
};

/// max |lam^(s)^T y(s) - lam^(tf)^T y(tf)| over the mesh of every piece and
/// both sides of every switching after the needle time. Throws
/// std::invalid_argument when the adjoint comes from a different trajectory.
DualityAudit duality_audit(const SensitivityContext& ctx, const AdjointTrajectory& adjoint, const VariationRecord& rec);

/// State transition matrix Phi(t_b, t_a) of the variational equation within one segment.
Eigen::MatrixXd transition_matrix(const SensitivityContext& ctx, std::size_t segment, double t_b, double t_a);

}  // namespace hocp
