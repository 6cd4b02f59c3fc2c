#include "mdiff/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mdiff {
namespace special {

namespace {

void check_k_domain(double x, const char* name) {
  if (!(x > 0.0)) throw DomainError(std::string(name) + " requires x > 0");
}

void check_overflow(double x, const char* name) {
  if (x > overflow_threshold)
    throw RangeError(std::string(name) + ": argument exceeds overflow threshold",
                     overflow_threshold);
}

}  // namespace

double bessel_i(int n, double x) {
  if (n < 0) throw DomainError("bessel_i: order must be >= 0");
  check_overflow(std::fabs(x), "bessel_i");
  // I_n(-x) = (-1)^n I_n(x)
  double ax = std::fabs(x);
  double v = std::cyl_bessel_i(static_cast<double>(n), ax);
  if (!std::isfinite(v))
    throw RangeError("bessel_i overflow", overflow_threshold);
  if (x < 0.0 && (n & 1)) v = -v;
  return v;
}

double bessel_k(int n, double x) {
  if (n < 0) throw DomainError("bessel_k: order must be >= 0");
  check_k_domain(x, "bessel_k");
  return std::cyl_bessel_k(static_cast<double>(n), x);
}

double sph_i(int n, double x) {
  if (n < 0) throw DomainError("sph_i: order must be >= 0");
  check_overflow(std::fabs(x), "sph_i");
  double ax = std::fabs(x);
  if (ax == 0.0) return n == 0 ? 1.0 : 0.0;
  // i_n(x) = x^n/(2n+1)!! * sum_k t_k,  t_0 = 1,
  // t_k = t_{k-1} * (x^2/2) / (k (2n+2k+1)).  All terms positive.
  double log_t0 = n * std::log(ax) -
                  (std::lgamma(2.0 * n + 2.0) - n * std::numbers::ln2 -
                   std::lgamma(n + 1.0));
  double t0 = std::exp(log_t0);
  if (t0 == 0.0) return 0.0;  // below double underflow; true value smaller
  double sum = 1.0, term = 1.0;
  const double x2h = 0.5 * ax * ax;
  for (int k = 1; k < 20000; ++k) {
    term *= x2h / (k * (2.0 * n + 2.0 * k + 1.0));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  double v = t0 * sum;
  if (!std::isfinite(v)) throw RangeError("sph_i overflow", overflow_threshold);
  if (x < 0.0 && (n & 1)) v = -v;
  return v;
}

double sph_k(int n, double x) {
  if (n < 0) throw DomainError("sph_k: order must be >= 0");
  check_k_domain(x, "sph_k");
  // k_n(x) = e^{-x}/x * sum_{k=0..n} (n+k)!/(k!(n-k)!) (2x)^{-k}; finite sum,
  // all terms positive.
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= (n + k) * (n - k + 1.0) / (2.0 * k * x);
    sum += term;
  }
  return std::exp(-x) / x * sum;
}

double legendre_p(int n, double x) {
  if (n < 0) throw DomainError("legendre_p: order must be >= 0");
  double pm1 = 1.0;
  if (n == 0) return pm1;
  double p = x;
  for (int k = 2; k <= n; ++k) {
    double pn = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = pn;
  }
  return p;
}

double sph_i_prime(int n, double x) {
  if (n == 0) return sph_i(1, x);
  return (n * sph_i(n - 1, x) + (n + 1) * sph_i(n + 1, x)) / (2.0 * n + 1.0);
}

double sph_k_prime(int n, double x) {
  if (n == 0) return -sph_k(1, x);
  return -(n * sph_k(n - 1, x) + (n + 1) * sph_k(n + 1, x)) / (2.0 * n + 1.0);
}

std::vector<double> legendre_seq(double x, int nmax) {
  std::vector<double> p(nmax + 1);
  p[0] = 1.0;
  if (nmax >= 1) p[1] = x;
  for (int k = 2; k <= nmax; ++k)
    p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
  return p;
}

namespace {

// Downward (Miller) recurrence ratios for cylindrical I:
//   I_{m-1}(x) = I_{m+1}(x) + (2m/x) I_m(x).
// Returns r[m] = I_{m+1}(x)/I_m(x), m = 0..nmax-1.
std::vector<double> miller_ratios_cyl(double x, int nmax) {
  std::vector<double> r(std::max(nmax, 0));
  if (nmax <= 0) return r;
  if (x < 1e-12) {
    for (int m = 0; m < nmax; ++m) r[m] = x / (2.0 * (m + 1.0));
    return r;
  }
  const int pad = 40 + static_cast<int>(std::ceil(std::sqrt(40.0 * nmax))) +
                  static_cast<int>(std::ceil(1.5 * x));
  int M = nmax + pad;
  double fp = 0.0, f = 1.0;  // unnormalized I_{M+1}, I_M
  std::vector<double> ratio(nmax);
  // march down, recording ratios once inside the requested range
  for (int m = M; m >= 1; --m) {
    double fm1 = fp + (2.0 * m / x) * f;
    if (m - 1 < nmax) ratio[m - 1] = f / fm1;
    fp = f;
    f = fm1;
    if (f > 1e280) {  // rescale to avoid overflow of the unnormalized pass
      fp /= 1e280;
      f /= 1e280;
    }
  }
  return ratio;
}

// Spherical analogue: i_{n-1}(x) = i_{n+1}(x) + ((2n+1)/x) i_n(x).
std::vector<double> miller_ratios_sph(double x, int nmax) {
  std::vector<double> r(std::max(nmax, 0));
  if (nmax <= 0) return r;
  if (x < 1e-12) {
    for (int m = 0; m < nmax; ++m) r[m] = x / (2.0 * m + 3.0);
    return r;
  }
  const int pad = 40 + static_cast<int>(std::ceil(std::sqrt(40.0 * nmax))) +
                  static_cast<int>(std::ceil(1.5 * x));
  int M = nmax + pad;
  double fp = 0.0, f = 1.0;
  std::vector<double> ratio(nmax);
  for (int m = M; m >= 1; --m) {
    double fm1 = fp + ((2.0 * m + 1.0) / x) * f;
    if (m - 1 < nmax) ratio[m - 1] = f / fm1;
    fp = f;
    f = fm1;
    if (f > 1e280) {
      fp /= 1e280;
      f /= 1e280;
    }
  }
  return ratio;
}

}  // namespace

std::vector<double> bessel_i_ratios(double x, int nmax) {
  return miller_ratios_cyl(x, nmax);
}

std::vector<double> sph_i_ratios(double x, int nmax) {
  return miller_ratios_sph(x, nmax);
}

std::vector<double> bessel_k_ratios(double x, int nmax) {
  check_k_domain(x, "bessel_k_ratios");
  std::vector<double> q(std::max(nmax, 0));
  if (nmax <= 0) return q;
  q[0] = bessel_k(1, x) / bessel_k(0, x);
  for (int m = 1; m < nmax; ++m) q[m] = 2.0 * m / x + 1.0 / q[m - 1];
  return q;
}

std::vector<double> sph_k_ratios(double x, int nmax) {
  check_k_domain(x, "sph_k_ratios");
  std::vector<double> q(std::max(nmax, 0));
  if (nmax <= 0) return q;
  q[0] = 1.0 + 1.0 / x;  // k_1/k_0
  for (int m = 1; m < nmax; ++m) q[m] = (2.0 * m + 1.0) / x + 1.0 / q[m - 1];
  return q;
}

std::vector<double> bessel_i_seq(double x, int nmax) {
  std::vector<double> f(nmax + 1);
  f[0] = bessel_i(0, x);
  auto r = bessel_i_ratios(x, nmax);
  for (int m = 1; m <= nmax; ++m) f[m] = f[m - 1] * r[m - 1];
  return f;
}

std::vector<double> bessel_k_seq(double x, int nmax) {
  std::vector<double> f(nmax + 1);
  f[0] = bessel_k(0, x);
  if (nmax >= 1) f[1] = bessel_k(1, x);
  for (int m = 1; m < nmax; ++m) f[m + 1] = f[m - 1] + (2.0 * m / x) * f[m];
  return f;
}

std::vector<double> sph_i_seq(double x, int nmax) {
  std::vector<double> f(nmax + 1);
  f[0] = sph_i(0, x);
  auto r = sph_i_ratios(x, nmax);
  for (int m = 1; m <= nmax; ++m) f[m] = f[m - 1] * r[m - 1];
  return f;
}

std::vector<double> sph_k_seq(double x, int nmax) {
  std::vector<double> f(nmax + 1);
  f[0] = sph_k(0, x);
  if (nmax >= 1) f[1] = sph_k(1, x);
  for (int m = 1; m < nmax; ++m)
    f[m + 1] = f[m - 1] + ((2.0 * m + 1.0) / x) * f[m];
  return f;
}

}  // namespace special

double eval_special(SpecialKind kind, double x) {
  using F = SpecialKind::Family;
  if (kind.order < 0) throw DomainError("eval_special: order must be >= 0");
  switch (kind.family) {
    case F::BesselI:
      return special::bessel_i(kind.order, x);
    case F::BesselK:
      return special::bessel_k(kind.order, x);
    case F::SphericalI:
      return special::sph_i(kind.order, x);
    case F::SphericalK:
      return special::sph_k(kind.order, x);
    case F::LegendreP:
      return special::legendre_p(kind.order, x);
  }
  throw DomainError("eval_special: unknown kind");
}

double interface_F(double x) {
  if (x < 0.0) throw DomainError("interface_F requires x >= 0");
  if (x == 0.0) return 0.0;
  if (x > 600.0) {
    // I1/I0 ~ 1 - 1/(2x) - 1/(8x^2) - 1/(8x^3) - 25/(128x^4)
    double ix = 1.0 / x;
    double ratio =
        1.0 - 0.5 * ix - 0.125 * ix * ix - 0.125 * ix * ix * ix -
        (25.0 / 128.0) * ix * ix * ix * ix;
    return x * ratio;
  }
  return x * special::bessel_i(1, x) / special::bessel_i(0, x);
}

}  // namespace mdiff
