#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdiff/greens.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

void check_in_rect(double L1, double L2, const Point& p, const char* who) {
  if (!(p[0] > 0.0 && p[0] < L1 && p[1] > 0.0 && p[1] < L2))
    throw DomainError(std::string(who) + ": point outside the open rectangle");
}

// ln|1 - c e^{i phi}| for 0 <= c <= 1, written to avoid cancellation:
// |1 - c e^{i phi}|^2 = (1-c)^2 + 4 c sin^2(phi/2).
double log_abs_one_minus(double c, double phi) {
  double s = std::sin(0.5 * phi);
  return 0.5 * std::log((1.0 - c) * (1.0 - c) + 4.0 * c * s * s);
}

}  // namespace

double rect_H0(double y, double yp, double L2) {
  return L2 / 3.0 + (y * y + yp * yp) / (2.0 * L2) - std::max(y, yp);
}

namespace {
double H0(double y, double yp, double L2) { return rect_H0(y, yp, L2); }
}  // namespace

RectLaplaceGreens::RectLaplaceGreens(double L1, double L2, double D,
                                     int tau_terms)
    : L1_(L1), L2_(L2), D_(D) {
  if (!(L1 > 0.0) || !(L2 > 0.0) || !(D > 0.0))
    throw DomainError("RectLaplaceGreens requires positive dimensions and D");
  tau_ = std::exp(-2.0 * pi * L2 / L1);
  if (tau_terms > 0) {
    terms_ = tau_terms;
  } else {
    // smallest truncation with geometric tail below 1e-14
    terms_ = 1;
    double t = tau_;
    while (t / (1.0 - tau_) > 1e-14 && terms_ < 20000) {
      t *= tau_;
      ++terms_;
    }
  }
}

double RectLaplaceGreens::tail_bound() const {
  return 8.0 / (pi * D_) * std::pow(tau_, terms_) / (1.0 - tau_);
}

GreensEval RectLaplaceGreens::eval(const Point& x, const Point& xp) const {
  check_in_rect(L1_, L2_, x, "rect_laplace_G0");
  check_in_rect(L1_, L2_, xp, "rect_laplace_G0");
  double rho = (x - xp).norm();
  if (rho == 0.0)
    throw SingularityError("rect_laplace_G0 evaluated at x == x'");

  const double phim = pi * (x[0] - xp[0]) / L1_;  // phase of z_-
  const double phip = pi * (x[0] + xp[0]) / L1_;  // phase of z_+
  const double adiff = std::fabs(x[1] - xp[1]);
  const double asum = std::fabs(x[1] + xp[1]);
  const double zeta_m = std::exp(-pi * adiff / L1_);
  const double zeta_p = std::exp(-pi * asum / L1_);
  const double vsig_m = std::exp(-pi * (2.0 * L2_ - adiff) / L1_);
  const double vsig_p = std::exp(-pi * (2.0 * L2_ - asum) / L1_);

  double sum = 0.0;
  double tj = 1.0;
  for (int j = 0; j < terms_; ++j) {
    if (j == 0) {
      // singular factor ln|1 - z_- zeta_-| handled through the regular
      // remainder ln(|1 - z_- zeta_-| / rho)
      double reg = log_abs_one_minus(zeta_m, phim) - std::log(rho);
      sum += reg;
    } else {
      sum += log_abs_one_minus(tj * zeta_m, phim);
    }
    sum += log_abs_one_minus(tj * zeta_p, phim);
    sum += log_abs_one_minus(tj * zeta_m, phip);
    sum += log_abs_one_minus(tj * zeta_p, phip);
    sum += log_abs_one_minus(tj * vsig_m, phim);
    sum += log_abs_one_minus(tj * vsig_p, phim);
    sum += log_abs_one_minus(tj * vsig_m, phip);
    sum += log_abs_one_minus(tj * vsig_p, phip);
    tj *= tau_;
  }

  GreensEval out;
  out.singular_part = -std::log(rho) / (2.0 * pi * D_);
  out.regular_part = (H0(x[1], xp[1], L2_) / L1_ - sum / (2.0 * pi)) / D_;
  out.value = out.singular_part + out.regular_part;
  return out;
}

double RectLaplaceGreens::regular_at(const Point& x) const {
  check_in_rect(L1_, L2_, x, "rect_laplace_G0");
  const double phip = 2.0 * pi * x[0] / L1_;
  const double zeta_p = std::exp(-2.0 * pi * x[1] / L1_);
  const double vsig_m = std::exp(-2.0 * pi * L2_ / L1_);  // = tau
  const double vsig_p = std::exp(-pi * (2.0 * L2_ - 2.0 * x[1]) / L1_);

  double sum = std::log(pi / L1_);  // limit of ln(|1 - z_- zeta_-|/rho)
  double tj = 1.0;
  for (int j = 0; j < terms_; ++j) {
    if (j > 0) sum += std::log1p(-tj);  // ln|1 - tau^j| at phi = 0, c = tau^j
    sum += log_abs_one_minus(tj * zeta_p, 0.0);
    sum += log_abs_one_minus(tj, phip);
    sum += log_abs_one_minus(tj * zeta_p, phip);
    sum += log_abs_one_minus(tj * vsig_m, 0.0);
    sum += log_abs_one_minus(tj * vsig_p, 0.0);
    sum += log_abs_one_minus(tj * vsig_m, phip);
    sum += log_abs_one_minus(tj * vsig_p, phip);
    tj *= tau_;
  }
  return (H0(x[1], x[1], L2_) / L1_ - sum / (2.0 * pi)) / D_;
}

}  // namespace mdiff
