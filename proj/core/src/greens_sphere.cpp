#include <cmath>
#include <numbers>

#include "mdiff/greens.hpp"
#include "mdiff/quadrature.hpp"
#include "mdiff/special.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

void check_in_ball(double R0, const Point& p, const char* who) {
  if (p.norm() >= R0)
    throw DomainError(std::string(who) + ": point outside the open ball");
}

}  // namespace

SphereLaplaceGreens::SphereLaplaceGreens(double R0, double D)
    : R0_(R0), D_(D) {
  if (!(R0 > 0.0) || !(D > 0.0))
    throw DomainError("SphereLaplaceGreens requires R0 > 0 and D > 0");
  // Zero-mean constant: with the source at the origin the B-free part is
  // radial, G(r,0) = 1/(4 pi r) + 1/(4 pi R0) + r^2/(8 pi R0^3), so a 1D
  // Gauss rule fixes B to machine precision.
  const double vol = 4.0 / 3.0 * pi * R0 * R0 * R0;
  double integral = quad::integrate(
      [&](double r) {
        double g = 1.0 / (4.0 * pi * r) + 1.0 / (4.0 * pi * R0) +
                   r * r / (8.0 * pi * R0 * R0 * R0);
        return 4.0 * pi * r * r * g;
      },
      0.0, R0, 64);
  B_ = -integral / vol;
}

GreensEval SphereLaplaceGreens::eval(const Point& x, const Point& xi) const {
  check_in_ball(R0_, x, "sphere_laplace_G0");
  check_in_ball(R0_, xi, "sphere_laplace_G0");
  const double rho = (x - xi).norm();
  if (rho == 0.0)
    throw SingularityError("sphere_laplace_G0 evaluated at x == x'");
  const double rx = x.norm(), rxi = xi.norm();
  const double vol = 4.0 / 3.0 * pi * R0_ * R0_ * R0_;

  double image, logterm;
  if (rx < 1e-14 || rxi < 1e-14) {
    // source or evaluation point at the centre: |x| |x' - xi| -> R0^2
    image = 1.0 / (4.0 * pi * R0_);
    logterm = 0.0;
  } else {
    // |x| |x' - xi| computed as |R0^2 x^ - |x| xi| (stable as |x| -> 0)
    Point xhat = x / rx;
    double xr = (R0_ * R0_ * xhat - rx * xi).norm();
    image = R0_ / (4.0 * pi * xr);
    double ct = x.dot(xi) / (rx * rxi);
    logterm = std::log(2.0 * R0_ * R0_ /
                       (R0_ * R0_ - rx * rxi * ct + xr)) /
              (4.0 * pi * R0_);
  }
  GreensEval out;
  out.singular_part = 1.0 / (4.0 * pi * D_ * rho);
  out.regular_part =
      (image + logterm + (rx * rx + rxi * rxi) / (6.0 * vol) + B_) / D_;
  out.value = out.singular_part + out.regular_part;
  return out;
}

double SphereLaplaceGreens::regular_at(const Point& x) const {
  check_in_ball(R0_, x, "sphere_laplace_G0");
  const double r = x.norm();
  const double vol = 4.0 / 3.0 * pi * R0_ * R0_ * R0_;
  double image = R0_ / (4.0 * pi * (R0_ * R0_ - r * r));
  double logterm =
      std::log(R0_ * R0_ / (R0_ * R0_ - r * r)) / (4.0 * pi * R0_);
  return (image + logterm + r * r / (3.0 * vol) + B_) / D_;
}

SphereHelmholtzGreens::SphereHelmholtzGreens(double R0, double D, double rate,
                                             int n_max)
    : R0_(R0), D_(D), rate_(rate), n_max_(n_max) {
  if (!(R0 > 0.0) || !(D > 0.0))
    throw DomainError("SphereHelmholtzGreens requires R0 > 0 and D > 0");
  if (!(rate > 0.0))
    throw DomainError("SphereHelmholtzGreens requires rate > 0");
  lambda_ = std::sqrt(rate / D);
}

// Boundary series of the sphere kernel,
//   sum_n (2n+1) P_n(ct) [k_n'(l R0)/i_n'(l R0)] i_n(l r) i_n(l r0),
// built from bounded ratio recurrences. If dsum is non-null it accumulates
// the term-wise derivative with respect to the rate. tail_out/terms_out, when
// non-null, receive the last-term geometric tail estimate and the term count.
double SphereHelmholtzGreens::boundary_series(double r, double r0, double ct,
                                              double* dsum, double* tail_out,
                                              int* terms_out) const {
  using namespace special;
  const double la = lambda_ * R0_, u = lambda_ * r, v = lambda_ * r0;
  const double decay = (r * r0) / (R0_ * R0_);
  const double dlam_ds = 1.0 / (2.0 * D_ * lambda_);
  int cap = n_max_;
  const int hard_cap = 1024;
  while (true) {
    auto rho_u = sph_i_ratios(u, cap + 2);
    auto rho_v = sph_i_ratios(v, cap + 2);
    auto rho_a = sph_i_ratios(la, cap + 2);
    auto q_a = sph_k_ratios(la, cap + 2);
    auto P = legendre_seq(ct, cap + 1);

    // base_0 = [k_0'(la)/i_0'(la)] i_0(u) i_0(v); k_0' = -k_1, i_0' = i_1
    double base = -sph_k(1, la) / sph_i(1, la) * sph_i(0, u) * sph_i(0, v);
    double sum = base;  // n = 0: (2n+1) P_0 = 1
    if (dsum) *dsum = 0.0;
    double envelope = std::fabs(base);
    bool converged = false;
    for (int n = 0; n <= cap; ++n) {
      if (dsum) {
        // logarithmic derivative of term n with respect to the rate
        double ioi, kok;      // i_n'/i_n, k_n'/k_n at la
        double ipoi, kpok;    // i_n/i_n', k_n/k_n' at la
        if (n == 0) {
          ioi = rho_a[0];
          kok = -q_a[0];
        } else {
          ioi = (n / rho_a[n - 1] + (n + 1) * rho_a[n]) / (2.0 * n + 1.0);
          kok = -(n / q_a[n - 1] + (n + 1) * q_a[n]) / (2.0 * n + 1.0);
        }
        ipoi = 1.0 / ioi;
        kpok = 1.0 / kok;
        double nn1 = n * (n + 1.0);
        double ippoip =
            ((la * la + nn1) * ipoi - 2.0 * la) / (la * la);  // i''/i'
        double kppokp = ((la * la + nn1) * kpok - 2.0 * la) / (la * la);
        double iu, iv;  // i_n'/i_n at u and v
        if (u < 1e-300) iu = 0.0;
        else if (n == 0) iu = rho_u[0];
        else iu = (n / rho_u[n - 1] + (n + 1) * rho_u[n]) / (2.0 * n + 1.0);
        if (v < 1e-300) iv = 0.0;
        else if (n == 0) iv = rho_v[0];
        else iv = (n / rho_v[n - 1] + (n + 1) * rho_v[n]) / (2.0 * n + 1.0);
        double logderiv =
            (R0_ * (kppokp - ippoip) + r * iu + r0 * iv) * dlam_ds;
        *dsum += (2.0 * n + 1.0) * P[n] * base * logderiv;
      }
      if (n == cap) break;
      // advance base_n -> base_{n+1}
      double ipr, kpr;
      if (n == 0) {
        ipr = (1.0 / rho_a[0] + 2.0 * rho_a[1]) / 3.0;
        kpr = (1.0 / q_a[0] + 2.0 * q_a[1]) / 3.0;
      } else {
        ipr = (2.0 * n + 1.0) / (2.0 * n + 3.0) *
              ((n + 1.0) + (n + 2.0) * rho_a[n] * rho_a[n + 1]) /
              (n / rho_a[n - 1] + (n + 1.0) * rho_a[n]);
        kpr = (2.0 * n + 1.0) / (2.0 * n + 3.0) *
              ((n + 1.0) + (n + 2.0) * q_a[n] * q_a[n + 1]) /
              (n / q_a[n - 1] + (n + 1.0) * q_a[n]);
      }
      base *= (kpr / ipr) * rho_u[n] * rho_v[n];
      double term = (2.0 * n + 3.0) * P[n + 1] * base;
      sum += term;
      envelope = (2.0 * n + 3.0) * std::fabs(base);
      if (envelope < 1e-15 * (std::fabs(sum) + 1e-300)) {
        converged = true;
        if (terms_out) *terms_out = n + 2;
        break;
      }
    }
    double tail = envelope * decay / std::max(1e-12, 1.0 - decay);
    if (tail_out) *tail_out = tail;
    if (converged) return sum;
    if (terms_out) *terms_out = cap + 1;
    if (tail < 1e-13 * (std::fabs(sum) + 1e-300)) return sum;
    if (cap >= hard_cap) {
      if (decay >= 1.0)
        throw AccuracyError("sphere Helmholtz series does not converge");
      return sum;
    }
    cap = std::min(hard_cap, 2 * cap);
  }
}

SphereHelmholtzGreens::Result SphereHelmholtzGreens::eval_with_tail(
    const Point& x, const Point& x0) const {
  check_in_ball(R0_, x, "sphere_helmholtz_G");
  check_in_ball(R0_, x0, "sphere_helmholtz_G");
  const double rho = (x - x0).norm();
  if (rho == 0.0)
    throw SingularityError("sphere_helmholtz_G evaluated at x == x'");
  const double r = x.norm(), r0 = x0.norm();
  double ct = 1.0;
  if (r > 1e-300 && r0 > 1e-300) ct = x.dot(x0) / (r * r0);

  Result out;
  double tail = 0.0;
  const double series = boundary_series(r, r0, ct, nullptr, &tail,
                                        &out.terms_used);
  out.g.singular_part = 1.0 / (4.0 * pi * D_ * rho);
  // regular part of the free-space kernel: (e^{-l rho} - 1)/(4 pi rho)
  double freereg = std::expm1(-lambda_ * rho) / (4.0 * pi * rho);
  out.g.regular_part = (freereg - lambda_ / (4.0 * pi) * series) / D_;
  out.g.value = out.g.singular_part + out.g.regular_part;
  out.tail = lambda_ / (4.0 * pi * D_) * tail;
  return out;
}

double SphereHelmholtzGreens::regular_at(const Point& x) const {
  check_in_ball(R0_, x, "sphere_helmholtz_G");
  const double r = x.norm();
  const double series = boundary_series(r, r, 1.0, nullptr);
  return (-lambda_ / (4.0 * pi) - lambda_ / (4.0 * pi) * series) / D_;
}

double SphereHelmholtzGreens::ds_value(const Point& x, const Point& x0) const {
  check_in_ball(R0_, x, "sphere_helmholtz_G");
  check_in_ball(R0_, x0, "sphere_helmholtz_G");
  const double rho = (x - x0).norm();
  if (rho == 0.0)
    throw SingularityError("sphere_helmholtz_G evaluated at x == x'");
  const double r = x.norm(), r0 = x0.norm();
  double ct = 1.0;
  if (r > 1e-300 && r0 > 1e-300) ct = x.dot(x0) / (r * r0);
  const double dlam_ds = 1.0 / (2.0 * D_ * lambda_);

  double dseries = 0.0;
  double series = boundary_series(r, r0, ct, &dseries);
  double dfree = -dlam_ds * std::exp(-lambda_ * rho) / (4.0 * pi);
  // d/ds [lambda * series] = dlam/ds * series + lambda * dseries
  return (dfree - (dlam_ds * series + lambda_ * dseries) / (4.0 * pi)) / D_;
}

double SphereHelmholtzGreens::ds_regular_at(const Point& x) const {
  check_in_ball(R0_, x, "sphere_helmholtz_G");
  const double r = x.norm();
  const double dlam_ds = 1.0 / (2.0 * D_ * lambda_);
  double dseries = 0.0;
  double series = boundary_series(r, r, 1.0, &dseries);
  return (-dlam_ds / (4.0 * pi) -
          (dlam_ds * series + lambda_ * dseries) / (4.0 * pi)) /
         D_;
}

}  // namespace mdiff
