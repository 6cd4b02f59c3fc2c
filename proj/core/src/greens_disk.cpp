#include <cmath>
#include <numbers>

#include "mdiff/greens.hpp"
#include "mdiff/special.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double euler_gamma = 0.5772156649015328606;

void check_in_disk(double a, const Point& p, const char* who) {
  if (std::hypot(p[0], p[1]) >= a)
    throw DomainError(std::string(who) + ": point outside the open disk");
}

void check_distinct(const Point& x, const Point& xi) {
  if ((x - xi).norm() == 0.0)
    throw SingularityError("Green's function evaluated at x == x'");
}

}  // namespace

DiskLaplaceGreens::DiskLaplaceGreens(double radius, double D)
    : a_(radius), D_(D) {
  if (!(radius > 0.0) || !(D > 0.0))
    throw DomainError("DiskLaplaceGreens requires radius > 0 and D > 0");
}

GreensEval DiskLaplaceGreens::eval(const Point& x, const Point& xi) const {
  check_in_disk(a_, x, "disk_laplace_G0");
  check_in_disk(a_, xi, "disk_laplace_G0");
  check_distinct(x, xi);
  const Point xs = x / a_, xis = xi / a_;
  const double rx = std::hypot(xs[0], xs[1]);
  const double rxi = std::hypot(xis[0], xis[1]);
  // image term |x|xi| - xi/|xi|| = sqrt(|x|^2|xi|^2 - 2 x.xi + 1), smooth in
  // xi near 0 where it tends to 1
  double image_sq =
      rx * rx * rxi * rxi - 2.0 * (xs[0] * xis[0] + xs[1] * xis[1]) + 1.0;
  double log_image = 0.5 * std::log(image_sq);
  GreensEval out;
  out.singular_part = -std::log((x - xi).norm()) / (2.0 * pi * D_);
  out.regular_part = (std::log(a_) - log_image +
                      0.5 * (rx * rx + rxi * rxi) - 0.75) /
                     (2.0 * pi * D_);
  out.value = out.singular_part + out.regular_part;
  return out;
}

double DiskLaplaceGreens::regular_at(const Point& x) const {
  check_in_disk(a_, x, "disk_laplace_G0");
  const double r = std::hypot(x[0], x[1]) / a_;
  return (std::log(a_) - std::log(1.0 - r * r) + r * r - 0.75) /
         (2.0 * pi * D_);
}

DiskHelmholtzGreens::DiskHelmholtzGreens(double radius, double D, double rate,
                                         int n_max)
    : a_(radius), D_(D), rate_(rate), n_max_(n_max) {
  if (!(radius > 0.0) || !(D > 0.0))
    throw DomainError("DiskHelmholtzGreens requires radius > 0 and D > 0");
  if (!(rate > 0.0))
    throw DomainError("DiskHelmholtzGreens requires rate > 0");
  lambda_ = std::sqrt(rate / D);
}

// Boundary correction sum_m eps_m cos(m dth) a_m I_m(l r) I_m(l r') with
// a_m = -K_m'(l a)/I_m'(l a). Individual Bessel factors can overflow for
// small rates, so terms are built from bounded ratio recurrences.
double DiskHelmholtzGreens::boundary_series(double r, double rp,
                                            double ct) const {
  using namespace special;
  const double la = lambda_ * a_, u = lambda_ * r, v = lambda_ * rp;
  const double decay = (r * rp) / (a_ * a_);
  int cap = n_max_;
  const int hard_cap = 1024;
  const double dth = std::acos(std::min(1.0, std::max(-1.0, ct)));
  while (true) {
    auto rho_u = bessel_i_ratios(u, cap + 2);
    auto rho_v = bessel_i_ratios(v, cap + 2);
    auto rho_a = bessel_i_ratios(la, cap + 2);
    auto q_a = bessel_k_ratios(la, cap + 2);
    double a0 = bessel_k(1, la) / bessel_i(1, la);
    double B = a0 * bessel_i(0, u) * bessel_i(0, v);
    double sum = B;  // m = 0 term (eps_0 = 1)
    double last = std::fabs(B);
    bool converged = false;
    for (int m = 0; m < cap; ++m) {
      double ipr, kpr;
      if (m == 0) {
        ipr = (1.0 / rho_a[0] + rho_a[1]) / 2.0;
        kpr = (1.0 / q_a[0] + q_a[1]) / 2.0;
      } else {
        ipr = rho_a[m - 1] * (1.0 + rho_a[m] * rho_a[m + 1]) /
              (1.0 + rho_a[m - 1] * rho_a[m]);
        kpr = q_a[m - 1] * (1.0 + q_a[m] * q_a[m + 1]) /
              (1.0 + q_a[m - 1] * q_a[m]);
      }
      B *= (kpr / ipr) * rho_u[m] * rho_v[m];
      double term = 2.0 * std::cos((m + 1) * dth) * B;
      sum += term;
      last = std::fabs(2.0 * B);
      if (last < 1e-15 * (std::fabs(sum) + 1e-300)) {
        converged = true;
        break;
      }
    }
    if (converged) return sum;
    double tail = last * decay / std::max(1e-12, 1.0 - decay);
    if (tail < 1e-13 * (std::fabs(sum) + 1e-300)) return sum;
    if (cap >= hard_cap) {
      if (decay >= 1.0)
        throw AccuracyError("disk Helmholtz series does not converge "
                            "(points too close to each other or the boundary)");
      return sum;  // tail below the geometric bound; accept
    }
    cap = std::min(hard_cap, 2 * cap);
  }
}

GreensEval DiskHelmholtzGreens::eval(const Point& x, const Point& xi) const {
  check_in_disk(a_, x, "disk_helmholtz_G");
  check_in_disk(a_, xi, "disk_helmholtz_G");
  check_distinct(x, xi);
  const double r = std::hypot(x[0], x[1]);
  const double rp = std::hypot(xi[0], xi[1]);
  double ct = 1.0;
  if (r > 1e-300 && rp > 1e-300)
    ct = (x[0] * xi[0] + x[1] * xi[1]) / (r * rp);
  const double rho = (x - xi).norm();
  const double z = lambda_ * rho;
  const double corr = boundary_series(r, rp, ct);
  GreensEval out;
  out.singular_part = -std::log(rho) / (2.0 * pi * D_);
  // regular part of the free-space kernel: K0(z) + ln(rho), expanded for
  // small z to avoid cancellation
  double k0reg;
  if (z < 1e-4) {
    double z2 = 0.25 * z * z;
    k0reg = -std::log(0.5 * lambda_) - euler_gamma +
            z2 * (1.0 - std::log(0.5 * z) - euler_gamma);
  } else {
    k0reg = special::bessel_k(0, z) + std::log(rho);
  }
  out.regular_part = (k0reg + corr) / (2.0 * pi * D_);
  out.value = out.singular_part + out.regular_part;
  return out;
}

double DiskHelmholtzGreens::regular_at(const Point& x) const {
  check_in_disk(a_, x, "disk_helmholtz_G");
  const double r = std::hypot(x[0], x[1]);
  const double corr = boundary_series(r, r, 1.0);
  return (-std::log(0.5 * lambda_) - euler_gamma + corr) / (2.0 * pi * D_);
}

}  // namespace mdiff
