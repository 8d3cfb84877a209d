#include "hocp/ode.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hocp;
using hocp::test::vec;

namespace {

const Rhs growth = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };

}  // namespace

TEST(Integrate, ExponentialGrowth) {
  const OdeResult r = integrate(growth, 0.0, vec({0.5}), 1.0, OdeOptions{});
  EXPECT_EQ(r.event, -1);
  EXPECT_DOUBLE_EQ(r.t_end, 1.0);
  EXPECT_NEAR(r.y_end(0), 0.5 * std::exp(1.0), 1e-9);
}

TEST(Integrate, EventAtLogTwo) {
  const double tol = 1e-10;
  const std::vector<OdeEvent> ev{{[](double, const Eigen::VectorXd& y) { return y(0) - 1.0; }, -1.0}};
  const OdeResult r = integrate(growth, 0.0, vec({0.5}), 1.0, OdeOptions{}, ev, tol);
  ASSERT_EQ(r.event, 0);
  EXPECT_FALSE(r.simultaneous);
  EXPECT_LE(std::fabs(r.t_end - std::log(2.0)), 10.0 * tol);
  // the reported time is past the crossing of the interpolant
  EXPECT_GE(r.y_end(0), 1.0);
  EXPECT_LT(r.dense(r.t_end - 2.0 * tol)(0), 1.0);
  EXPECT_DOUBLE_EQ(r.dense.t_end(), r.t_end);
}

TEST(Integrate, Backward) {
  const OdeResult r = integrate(growth, 1.0, vec({std::exp(1.0)}), 0.0, OdeOptions{});
  EXPECT_NEAR(r.y_end(0), 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.dense.t_begin(), 1.0);
  EXPECT_DOUBLE_EQ(r.dense.t_end(), 0.0);
  EXPECT_NEAR(r.dense(0.5)(0), std::exp(0.5), 1e-9);
  const auto mesh = r.dense.mesh();
  for (std::size_t i = 1; i < mesh.size(); ++i) EXPECT_LT(mesh[i], mesh[i - 1]);
}

TEST(Dense, InterpolantAndDerivative) {
  const Rhs osc = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy << y(1), -y(0);
  };
  const OdeResult r = integrate(osc, 0.0, vec({0.0, 1.0}), 6.0, OdeOptions{});
  for (double t = 0.0; t <= 6.0; t += 0.173) {
    const Eigen::VectorXd y = r.dense(t);
    EXPECT_NEAR(y(0), std::sin(t), 1e-8);
    EXPECT_NEAR(y(1), std::cos(t), 1e-8);
    EXPECT_NEAR(r.dense.derivative(t)(0), std::cos(t), 1e-6);
  }
  const DenseOutput second = r.dense.block(1, 1);
  EXPECT_EQ(second.dim(), 1u);
  EXPECT_NEAR(second(2.0)(0), std::cos(2.0), 1e-8);
  const auto mesh = r.dense.mesh();
  EXPECT_DOUBLE_EQ(mesh.front(), 0.0);
  EXPECT_DOUBLE_EQ(mesh.back(), 6.0);
}

TEST(Integrate, LandsOnBreakpoints) {
  // forcing with a kink at 0.3; each piece is integrated exactly
  const Rhs step = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dy) {
    dy.resize(1);
    dy(0) = std::fabs(t - 0.3);
  };
  OdeOptions opt;
  opt.breakpoints = {0.3};
  const OdeResult r = integrate(step, 0.0, vec({0.0}), 1.0, opt);
  const auto mesh = r.dense.mesh();
  EXPECT_NE(std::find(mesh.begin(), mesh.end(), 0.3), mesh.end());
  EXPECT_NEAR(r.y_end(0), 0.5 * (0.3 * 0.3 + 0.7 * 0.7), 1e-13);
  EXPECT_LE(r.steps, 10u);
}

TEST(Integrate, ToleranceControlsError) {
  double prev = 1.0;
  for (double rtol : {1e-6, 1e-8, 1e-10}) {
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = rtol * 1e-2;
    const OdeResult r = integrate(growth, 0.0, vec({1.0}), 3.0, opt);
    const double err = std::fabs(r.y_end(0) - std::exp(3.0));
    EXPECT_LE(err, 100.0 * rtol * std::exp(3.0));
    EXPECT_LE(err, prev);
    prev = err;
  }
}

TEST(Integrate, NonFiniteStateFails) {
  const Rhs blowup = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y.array().square(); };
  EXPECT_THROW(integrate(blowup, 0.0, vec({1.0}), 2.0, OdeOptions{}), OdeError);
}
