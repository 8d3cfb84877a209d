#include "hocp/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hocp {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double err_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& sk) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / sk.array()).square().mean());
}

}  // namespace

DenseOutput::DenseOutput(std::size_t dim, double t_begin) : dim_(dim), t_begin_(t_begin), t_end_(t_begin) {}

void DenseOutput::push(Step step) {
  t_end_ = step.end();
  steps_.push_back(std::move(step));
}

void DenseOutput::truncate(double t_end) { t_end_ = t_end; }

DenseOutput DenseOutput::block(std::size_t start, std::size_t len) const {
  DenseOutput out(len, t_begin_);
  for (const auto& s : steps_) {
    out.push(Step{s.t0, s.h, s.coef.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)), s.t1});
  }
  out.t_end_ = t_end_;
  return out;
}

const DenseOutput::Step& DenseOutput::locate(double t, double& theta) const {
  if (steps_.empty()) throw OdeError("empty dense output");
  const double dir = steps_.front().h >= 0.0 ? 1.0 : -1.0;
  // first step whose start lies past t (in integration direction), minus one
  auto it = std::upper_bound(steps_.begin(), steps_.end(), dir * t,
                             [dir](double key, const Step& s) { return key < dir * s.t0; });
  const Step& s = it == steps_.begin() ? steps_.front() : *std::prev(it);
  theta = s.h == 0.0 ? 0.0 : (t - s.t0) / s.h;
  return s;
}

Eigen::VectorXd DenseOutput::operator()(double t) const {
  double th = 0.0;
  const Step& s = locate(t, th);
  const double th1 = 1.0 - th;
  const auto& r = s.coef;
  return r.col(0) + th * (r.col(1) + th1 * (r.col(2) + th * (r.col(3) + th1 * r.col(4))));
}

Eigen::VectorXd DenseOutput::derivative(double t) const {
  double th = 0.0;
  const Step& s = locate(t, th);
  const double th1 = 1.0 - th;
  const auto& r = s.coef;
  Eigen::VectorXd A = r.col(3) + th1 * r.col(4);
  Eigen::VectorXd B = r.col(2) + th * A;
  Eigen::VectorXd C = r.col(1) + th1 * B;
  Eigen::VectorXd dA = -r.col(4);
  Eigen::VectorXd dB = A + th * dA;
  Eigen::VectorXd dC = -B + th1 * dB;
  if (s.h == 0.0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  return (C + th * dC) / s.h;
}

std::vector<double> DenseOutput::mesh() const {
  std::vector<double> out;
  out.reserve(steps_.size() + 1);
  out.push_back(t_begin_);
  const double dir = steps_.empty() || steps_.front().h >= 0.0 ? 1.0 : -1.0;
  for (const auto& s : steps_) {
    double te = s.end();
    if (dir * (te - t_end_) >= 0.0) break;
    out.push_back(te);
  }
  if (out.back() != t_end_) out.push_back(t_end_);
  return out;
}

OdeResult integrate(const Rhs& f, double t0, const Eigen::VectorXd& y0, double t1, const OdeOptions& opt,
                    std::span<const OdeEvent> events, double event_tol) {
  const Eigen::Index n = y0.size();
  OdeResult res;
  res.dense = DenseOutput(static_cast<std::size_t>(n), t0);
  res.t_end = t0;
  res.y_end = y0;
  if (t1 == t0) return res;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::fabs(t1 - t0);

  // Breakpoints strictly inside the interval, in integration order.
  std::vector<double> bps;
  for (double b : opt.breakpoints) {
    if (dir * (b - t0) > 0.0 && dir * (t1 - b) > 0.0) bps.push_back(b);
  }
  std::sort(bps.begin(), bps.end(), [dir](double a, double b) { return dir * a < dir * b; });
  bps.push_back(t1);
  std::size_t next_bp = 0;

  Eigen::VectorXd y = y0, y1(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), sk(n);
  double t = t0;
  f(t, y, k1);
  if (!k1.allFinite()) throw OdeError("non-finite derivative at t=" + std::to_string(t));

  auto scale = [&](const Eigen::VectorXd& a) {
    sk = (opt.atol + opt.rtol * a.array().abs()).matrix();
    return sk;
  };

  // initial step size
  double h;
  {
    scale(y);
    double dn0 = err_norm(y, sk), dn1 = err_norm(k1, sk);
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, span);
    tmp = y + dir * h0 * k1;
    f(t + dir * h0, tmp, k2);
    double dn2 = k2.allFinite() ? err_norm(k2 - k1, sk) / h0 : 0.0;
    double dm = std::max(dn1, dn2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, opt.h_max, span});
  }

  std::vector<double> sign(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) sign[i] = events[i].sign >= 0.0 ? 1.0 : -1.0;

  const double h_min_rel = 16.0 * std::numeric_limits<double>::epsilon();
  bool last_rejected = false;

  while (true) {
    const double target = bps[next_bp];
    bool hit_target = false;
    if (h >= std::fabs(target - t)) {
      h = std::fabs(target - t);
      hit_target = true;
    }
    if (h <= h_min_rel * std::max(1.0, std::fabs(t))) {
      throw OdeError("step size underflow at t=" + std::to_string(t));
    }
    if (res.steps + res.rejected >= opt.max_steps) throw OdeError("maximum step count exceeded");

    const double hs = dir * h;
    const double t_new = hit_target ? target : t + hs;
    bool stage_failed = false;
    try {
      tmp = y + hs * (a21 * k1);
      f(t + c2 * hs, tmp, k2);
      tmp = y + hs * (a31 * k1 + a32 * k2);
      f(t + c3 * hs, tmp, k3);
      tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hs, tmp, k4);
      tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hs, tmp, k5);
      tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(hit_target ? t_new : t + hs, tmp, k6);
      y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      f(t_new, y1, k7);
    } catch (const std::exception&) {
      // trial point outside the domain of f: treat as a rejected step
      stage_failed = true;
    }

    double err;
    if (stage_failed || !y1.allFinite() || !k7.allFinite()) {
      err = std::numeric_limits<double>::infinity();
    } else {
      tmp = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      sk = (opt.atol + opt.rtol * y.array().abs().max(y1.array().abs())).matrix();
      err = err_norm(tmp, sk);
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    }

    if (err > 1.0) {
      ++res.rejected;
      double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      last_rejected = true;
      continue;
    }

    // accepted: build interpolant
    DenseOutput::Step step;
    step.t0 = t;
    step.h = t_new - t;
    step.t1 = t_new;
    step.coef.resize(n, 5);
    Eigen::VectorXd ydiff = y1 - y;
    Eigen::VectorXd bspl = step.h * k1 - ydiff;
    step.coef.col(0) = y;
    step.coef.col(1) = ydiff;
    step.coef.col(2) = bspl;
    step.coef.col(3) = ydiff - step.h * k7 - bspl;
    step.coef.col(4) = step.h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    res.dense.push(std::move(step));
    ++res.steps;

    // events at the step end
    int fired = -1;
    double t_fire = 0.0;
    std::vector<std::pair<int, double>> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (sign[i] * events[i].g(t_new, y1) > 0.0) continue;
      double lo = t, hi = t_new;
      while (std::fabs(hi - lo) > event_tol) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (sign[i] * events[i].g(mid, res.dense(mid)) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      hits.emplace_back(static_cast<int>(i), hi);
      if (fired < 0 || dir * (hi - t_fire) < 0.0) {
        fired = static_cast<int>(i);
        t_fire = hi;
      }
    }
    if (fired >= 0) {
      for (const auto& [i, th] : hits) {
        if (i != fired && std::fabs(th - t_fire) <= event_tol) res.simultaneous = true;
      }
      res.dense.truncate(t_fire);
      res.t_end = t_fire;
      res.y_end = t_fire == t_new ? y1 : res.dense(t_fire);
      res.event = fired;
      return res;
    }

    t = t_new;
    y = y1;
    k1 = k7;
    if (hit_target) {
      if (next_bp + 1 == bps.size()) break;
      ++next_bp;
      f(t, y, k1);  // derivative may jump at a breakpoint
    }

    double fac = std::min(10.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    if (last_rejected) fac = std::min(fac, 1.0);
    h = std::min(h * fac, opt.h_max);
    last_rejected = false;
  }

  res.t_end = t1;
  res.y_end = y;
  return res;
}

}  // namespace hocp
