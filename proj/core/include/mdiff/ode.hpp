#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <string>

#include "mdiff/errors.hpp"

namespace mdiff {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0.0;   // 0 = choose automatically
  double h_max = 0.0;    // 0 = span/4
  long max_steps = 5'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive Dormand-Prince 5(4). Calls observer(t, y) at t0 and after every
/// accepted step. The observer may shorten the integration by returning false.
/// Throws Error on step-size underflow or nonfinite states that persist after
/// step rejection.
template <class RHS, class Observer>
OdeStats integrate_dp45(RHS&& rhs, Eigen::VectorXd& y, double t0, double t1,
                        const OdeOptions& opt, Observer&& observer) {
  using Vec = Eigen::VectorXd;
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats stats;
  const double span = t1 - t0;
  if (span <= 0.0) {
    observer(t0, y);
    return stats;
  }
  double h_max = opt.h_max > 0.0 ? opt.h_max : span / 4.0;
  double t = t0;
  Vec k1 = rhs(t, y);
  double h = opt.h_init;
  if (h <= 0.0) {
    double ynorm = y.norm() + opt.atol;
    double fnorm = k1.norm() + 1e-30;
    h = std::min(h_max, 0.01 * ynorm / fnorm);
    if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6 * span;
  }
  h = std::min(h, h_max);

  if (!observer(t, y)) return stats;

  Vec k2, k3, k4, k5, k6, k7, ynew, yerr;
  while (t < t1) {
    if (t1 - t <= 1e-14 * std::max(1.0, std::fabs(t1))) break;  // span exhausted
    if (stats.accepted + stats.rejected > opt.max_steps)
      throw Error("integrate_dp45: max step count exceeded");
    h = std::min(h, t1 - t);
    if (!(h > 1e-14 * std::max(1.0, std::fabs(t))))
      throw Error("integrate_dp45: step size underflow at t = " +
                  std::to_string(t));

    k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, ynew);
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    bool finite = ynew.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
        double e = yerr[i] / sc;
        err += e * e;
      }
      err = std::sqrt(err / static_cast<double>(y.size()));
    } else {
      err = 1e6;  // reject and retry with a smaller step
    }

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      ++stats.accepted;
      if (!observer(t, y)) return stats;
    } else {
      ++stats.rejected;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::min(5.0, std::max(0.2, fac));
    h = std::min(h * fac, h_max);
  }
  return stats;
}

}  // namespace mdiff
