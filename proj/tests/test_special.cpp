#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdiff/special.hpp"

using namespace mdiff;

namespace {

// 50-term power series reference for I_n; every term is positive so the
// truncation error is bounded by the first dropped term (interval bound).
double series_In(int n, double x, double* bound = nullptr) {
  double term = std::pow(0.5 * x, n);
  for (int k = 1; k <= n; ++k) term /= k;
  double sum = term;
  double x2 = 0.25 * x * x;
  for (int k = 1; k <= 50; ++k) {
    term *= x2 / (k * (n + k));
    sum += term;
  }
  if (bound) *bound = term * x2 / (51.0 * (n + 51.0)) / (1.0 - x2 / 2700.0);
  return sum;
}

}  // namespace

TEST_CASE("modified spherical Bessel closed forms") {
  // i0(x) = sinh(x)/x, k0(x) = exp(-x)/x
  CHECK(eval_special({SpecialKind::Family::SphericalI, 0}, 1.0) ==
        doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
  CHECK(eval_special({SpecialKind::Family::SphericalK, 0}, 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  // i1(x) = (x cosh x - sinh x)/x^2, k1(x) = e^-x (x+1)/x^2
  for (double x : {0.3, 1.0, 2.5, 7.0}) {
    double i1 = (x * std::cosh(x) - std::sinh(x)) / (x * x);
    double k1 = std::exp(-x) * (x + 1.0) / (x * x);
    CHECK(special::sph_i(1, x) == doctest::Approx(i1).epsilon(1e-13));
    CHECK(special::sph_k(1, x) == doctest::Approx(k1).epsilon(1e-13));
  }
  CHECK(special::sph_i(0, 0.0) == 1.0);
  CHECK(special::sph_i(3, 0.0) == 0.0);
}

TEST_CASE("Legendre polynomials") {
  CHECK(eval_special({SpecialKind::Family::LegendreP, 1}, 0.5) == 0.5);
  // P2(x) = (3x^2-1)/2 and the n=7 recurrence against std::legendre
  for (double x : {-0.9, -0.2, 0.0, 0.4, 1.0}) {
    CHECK(special::legendre_p(2, x) ==
          doctest::Approx(0.5 * (3.0 * x * x - 1.0)).epsilon(1e-14));
    CHECK(special::legendre_p(7, x) ==
          doctest::Approx(std::legendre(7, x)).epsilon(1e-12));
  }
}

TEST_CASE("cylindrical I against the positive-term series") {
  for (int n : {0, 1, 2, 5, 11}) {
    for (double x : {0.05, 0.5, 1.0, 3.0, 8.0, 20.0}) {
      double bound = 0.0;
      double ref = series_In(n, x, &bound);
      double got = special::bessel_i(n, x);
      CHECK(std::fabs(got - ref) <= 1e-12 * ref + bound);
    }
  }
}

TEST_CASE("cylindrical K via the Wronskian I_n(x)K_{n+1}(x) + I_{n+1}(x)K_n(x) = 1/x") {
  for (int n : {0, 1, 3, 7}) {
    for (double x : {0.2, 1.0, 4.0, 12.0, 40.0}) {
      double w = special::bessel_i(n, x) * special::bessel_k(n + 1, x) +
                 special::bessel_i(n + 1, x) * special::bessel_k(n, x);
      CHECK(w == doctest::Approx(1.0 / x).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative identities by central differences") {
  const double h = 1e-6;
  for (double x : {0.5, 1.0, 2.0, 5.0}) {
    // planar: d/dx [x I1(x)] = x I0(x)
    auto f = [](double t) { return t * special::bessel_i(1, t); };
    double lhs = (f(x + h) - f(x - h)) / (2.0 * h);
    double rhs = x * special::bessel_i(0, x);
    CHECK(std::fabs(lhs - rhs) < 1e-8 * std::max(1.0, std::fabs(rhs)));
    // spherical analogue: d/dx [x^2 i1(x)] = x^2 i0(x)
    auto g = [](double t) { return t * t * special::sph_i(1, t); };
    double lhs2 = (g(x + h) - g(x - h)) / (2.0 * h);
    double rhs2 = x * x * special::sph_i(0, x);
    CHECK(std::fabs(lhs2 - rhs2) < 1e-8 * std::max(1.0, std::fabs(rhs2)));
  }
}

TEST_CASE("interface_F") {
  CHECK(interface_F(0.0) == 0.0);
  // small-argument limit F(x)/x^2 -> 1/2
  double x = 1e-4;
  CHECK(interface_F(x) / (x * x) == doctest::Approx(0.5).epsilon(1e-7));
  // F(2) against the series oracle ratio
  double ref = 2.0 * series_In(1, 2.0) / series_In(0, 2.0);
  CHECK(interface_F(2.0) == doctest::Approx(ref).epsilon(1e-12));
  // monotone increasing and bounded by x
  double prev = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 650.0}) {
    double v = interface_F(t);
    CHECK(v > prev);
    CHECK(v < t);
    prev = v;
  }
  // asymptotic branch continuity at the switch point
  CHECK(interface_F(600.0 + 1e-9) ==
        doctest::Approx(interface_F(600.0 - 1e-9)).epsilon(1e-9));
}

TEST_CASE("domain and range errors") {
  CHECK_THROWS_AS(eval_special({SpecialKind::Family::BesselK, 0}, 0.0),
                  DomainError);
  CHECK_THROWS_AS(eval_special({SpecialKind::Family::BesselK, 0}, -1.0),
                  DomainError);
  CHECK_THROWS_AS(eval_special({SpecialKind::Family::SphericalK, 2}, -0.5),
                  DomainError);
  try {
    eval_special({SpecialKind::Family::BesselI, 0}, 800.0);
    CHECK(false);
  } catch (const RangeError& e) {
    CHECK(e.threshold == doctest::Approx(special::overflow_threshold));
  }
  CHECK_THROWS_AS(eval_special({SpecialKind::Family::SphericalI, 0}, 800.0),
                  RangeError);
}

TEST_CASE("sequences agree with scalar evaluations") {
  for (double x : {0.05, 0.7, 3.0, 15.0}) {
    auto iseq = special::bessel_i_seq(x, 12);
    auto kseq = special::bessel_k_seq(x, 12);
    auto siseq = special::sph_i_seq(x, 12);
    auto skseq = special::sph_k_seq(x, 12);
    for (int n = 0; n <= 12; ++n) {
      CHECK(iseq[n] ==
            doctest::Approx(special::bessel_i(n, x)).epsilon(1e-11));
      CHECK(kseq[n] ==
            doctest::Approx(special::bessel_k(n, x)).epsilon(1e-11));
      CHECK(siseq[n] == doctest::Approx(special::sph_i(n, x)).epsilon(1e-11));
      CHECK(skseq[n] == doctest::Approx(special::sph_k(n, x)).epsilon(1e-11));
    }
    auto ir = special::bessel_i_ratios(x, 8);
    auto sir = special::sph_i_ratios(x, 8);
    for (int n = 0; n < 8; ++n) {
      CHECK(ir[n] == doctest::Approx(iseq[n + 1] / iseq[n]).epsilon(1e-11));
      CHECK(sir[n] == doctest::Approx(siseq[n + 1] / siseq[n]).epsilon(1e-11));
    }
  }
}

TEST_CASE("spherical derivative helpers match finite differences") {
  const double h = 1e-6;
  for (int n : {0, 1, 4}) {
    for (double x : {0.4, 1.3, 6.0}) {
      double di = (special::sph_i(n, x + h) - special::sph_i(n, x - h)) /
                  (2.0 * h);
      double dk = (special::sph_k(n, x + h) - special::sph_k(n, x - h)) /
                  (2.0 * h);
      CHECK(special::sph_i_prime(n, x) == doctest::Approx(di).epsilon(1e-8));
      CHECK(special::sph_k_prime(n, x) == doctest::Approx(dk).epsilon(1e-8));
    }
  }
}
