#pragma once

#include "hocp/model.hpp"
#include "hocp/simulate.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace hocp {

/// H_q = l_q + lam^T f_q with cached symbolic partials.
struct Hamiltonian {
  std::size_t loc = 0;
  std::size_t n = 0, m = 0;
  Expr H;
  std::vector<Expr> dH_dx;
  std::vector<Expr> dH_dlam;
  std::vector<Expr> dH_du;
  Expr dH_dt;

  /// Componentwise-separable quadratic structure in u:
  /// dH/du_i = a_i * u_i + b_i with a_i, b_i free of u.
  bool separable = false;
  std::vector<Expr> quad;  // a_i
  std::vector<Expr> lin;   // b_i
};

struct Minimizer {
  Eigen::VectorXd u;
  double H = 0.0;
};

/// Symbolic derivatives of a transition needed by the adjoint jump.
struct TransitionDerivatives {
  std::vector<std::vector<Expr>> jump_jac;  // [to component][from component]
  std::vector<Expr> cost_grad;
  std::vector<Expr> manifold_grad;  // empty when controlled
  std::vector<Expr> jump_dt;
  Expr cost_dt;
  Expr manifold_dt;
};

/// Hamiltonians and compiled derivative programs for a whole model.
class HamiltonianSet {
 public:
  explicit HamiltonianSet(std::shared_ptr<const CompiledModel> cm);

  const CompiledModel& compiled() const { return *cm_; }
  std::shared_ptr<const CompiledModel> compiled_ptr() const { return cm_; }
  const Hamiltonian& hamiltonian(std::size_t q) const { return ham_[q]; }
  const TransitionDerivatives& derivatives(std::size_t k) const { return tder_[k]; }

  double value(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& lam,
               double t) const;
  /// dH/dx at (x, u, lam, t).
  Eigen::VectorXd state_gradient(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& lam, double t) const;
  double time_partial(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& lam,
                      double t) const;
  /// Pointwise minimization over the control box.
  Minimizer minimize(std::size_t q, const Eigen::VectorXd& x, const Eigen::VectorXd& lam, double t) const;

  Eigen::MatrixXd jump_jacobian(std::size_t k, const Eigen::VectorXd& x, double t) const;
  Eigen::VectorXd cost_gradient(std::size_t k, const Eigen::VectorXd& x, double t) const;
  Eigen::VectorXd terminal_gradient(const Eigen::VectorXd& x, double t) const;
  double terminal_time_partial(const Eigen::VectorXd& x, double t) const;

 private:
  struct CompiledHam {
    Program H;
    std::vector<Program> dH_dx, dH_du, quad, lin;
    Program dH_dt;
  };
  struct CompiledTrans {
    std::vector<std::vector<Program>> jac;
    std::vector<Program> cost_grad;
  };

  std::shared_ptr<const CompiledModel> cm_;
  std::vector<Hamiltonian> ham_;
  std::vector<CompiledHam> cham_;
  std::vector<TransitionDerivatives> tder_;
  std::vector<CompiledTrans> ctrans_;
  std::vector<Program> terminal_grad_;  // layout [t, x1..x_nmax]
  Program terminal_dt_;
  std::size_t max_dim_ = 0;
};

std::vector<Hamiltonian> build_hamiltonians(const HybridModel& model);

Minimizer minimize_hamiltonian(const HamiltonianSet& hs, std::size_t q, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& lam, double t);

/// lam- = grad(xi)^T lam+ + grad(c) + p grad(m). Throws std::invalid_argument
/// when p != 0 on a controlled transition.
Eigen::VectorXd adjoint_jump(const HamiltonianSet& hs, std::size_t k, const Eigen::VectorXd& x_minus, double t,
                             const Eigen::VectorXd& lam_plus, double p);

/// Multiplier making H_{q-}(t-) equal to `H_plus` (lam- is affine in p).
/// Throws std::domain_error when |grad(m)^T f-| is below transversality_eps.
double solve_p_from_hamiltonian_continuity(const HamiltonianSet& hs, std::size_t k, const Eigen::VectorXd& x_minus,
                                           const Eigen::VectorXd& u_minus, double t, const Eigen::VectorXd& lam_plus,
                                           double H_plus, double transversality_eps = 1e-9);

struct AdjointSegment {
  std::size_t loc = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  DenseOutput lam;
};

struct SwitchRecord {
  double t = 0.0;
  std::size_t transition = 0;
  double p = 0.0;
  double H_minus = 0.0;
  double H_plus = 0.0;
  Eigen::VectorXd lam_minus;
  Eigen::VectorXd lam_plus;
};

struct AdjointTrajectory {
  std::vector<AdjointSegment> segments;
  std::vector<SwitchRecord> switches;
  /// Cost multiplier; the normal case fixes it at 1.
  double lambda0 = 1.0;

  /// Adjoint in segment i at t (clamped into the segment).
  Eigen::VectorXd at(std::size_t segment, double t) const;
};

/// Backward integration of lam' = -dH/dx along a completed trajectory, with
/// p from Hamiltonian continuity at autonomous switchings. The model must be
/// time invariant (apply to_time_invariant first).
AdjointTrajectory integrate_adjoint_backward(const HamiltonianSet& hs, const HybridTrajectory& traj,
                                             const ControlLaw& control, const SimConfig& cfg = {});

/// Bolza to Mayer: leading state z with z' = l, z+ = z- + c, g^ = z + g.
HybridModel to_mayer(const HybridModel& model);

/// Prepends a clock state theta (theta' = 1, theta+ = theta-) and rewrites t
/// as theta. The result is time invariant.
HybridModel to_time_invariant(const HybridModel& model);

}  // namespace hocp
