#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace hocp {

class OdeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Piecewise quartic interpolant produced by the Dormand-Prince 5(4) pair.
/// Integration may run forward or backward in time.
class DenseOutput {
 public:
  struct Step {
    double t0;
    double h;
    Eigen::MatrixXd coef;  // n x 5
    /// Exact step end when t0 + h rounds differently (breakpoints).
    double t1 = std::numeric_limits<double>::quiet_NaN();
    double end() const { return std::isnan(t1) ? t0 + h : t1; }
  };

  DenseOutput() = default;
  DenseOutput(std::size_t dim, double t_begin);

  std::size_t dim() const { return dim_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  bool empty() const { return steps_.empty(); }
  const std::vector<Step>& steps() const { return steps_; }

  Eigen::VectorXd operator()(double t) const;
  Eigen::VectorXd derivative(double t) const;
  /// Step boundaries from t_begin to t_end in integration order.
  std::vector<double> mesh() const;

  void push(Step step);
  /// Ends the valid range inside the last step (event location).
  void truncate(double t_end);
  /// Interpolant of components [start, start + len).
  DenseOutput block(std::size_t start, std::size_t len) const;

 private:
  const Step& locate(double t, double& theta) const;

  std::size_t dim_ = 0;
  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  std::vector<Step> steps_;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  /// Times the integrator must land on exactly (control discontinuities).
  std::vector<double> breakpoints;
};

/// Scalar event function. `sign` is the side the trajectory is armed on;
/// the event fires when sign * g(t, y) <= 0 at a step end.
struct OdeEvent {
  std::function<double(double t, const Eigen::VectorXd& y)> g;
  double sign = 1.0;
};

struct OdeResult {
  DenseOutput dense;
  double t_end = 0.0;
  Eigen::VectorXd y_end;
  int event = -1;
  bool simultaneous = false;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (either direction). Stops at the
/// first event, located by bisection on the interpolant to width event_tol;
/// the reported time is the bracket end past the crossing.
OdeResult integrate(const Rhs& f, double t0, const Eigen::VectorXd& y0, double t1, const OdeOptions& opt,
                    std::span<const OdeEvent> events = {}, double event_tol = 1e-10);

}  // namespace hocp
