#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mdiff/oracle.hpp"
#include "mdiff/steady3d.hpp"

using namespace mdiff;

namespace {
constexpr double pi = std::numbers::pi;

ProblemSpec ball_spec(double gamma0, double eps,
                      std::vector<std::pair<Point, double>> comps,
                      double kappa = std::numeric_limits<double>::infinity()) {
  ProblemSpec ps;
  ps.geometry = Sphere3D{1.0};
  ps.gamma0 = gamma0;
  ps.epsilon = eps;
  for (auto& [x, c0] : comps) {
    CompartmentSpec c;
    c.center = x;
    c.kappa = kappa;
    c.model = ModelI{c0};
    ps.compartments.push_back(c);
  }
  return ps;
}

}  // namespace

TEST_CASE("capacitance closed forms") {
  CHECK(capacitance({ShapeSphere{1.0}}) == 1.0);
  CHECK(capacitance({ShapeSphere{0.3}}) == 0.3);
  CHECK(capacitance({ShapeHemisphere{1.0}}) ==
        doctest::Approx(2.0 * (1.0 - 1.0 / std::sqrt(3.0))).epsilon(1e-14));
  // prolate a=2, b=1: direct arithmetic on the printed formula
  double oracle = std::sqrt(3.0) / std::acosh(2.0);
  CHECK(capacitance({ShapeProlateSpheroid{2.0, 1.0}}) ==
        doctest::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(1.3151906).epsilon(1e-6));
  // equal axes degrade to the sphere by continuity
  CHECK(capacitance({ShapeProlateSpheroid{1.4, 1.4}}) == 1.4);
  CHECK(capacitance({ShapeOblateSpheroid{1.4, 1.4}}) == 1.4);
  // the printed oblate form is not real-valued for b < a
  CHECK_THROWS_AS(capacitance({ShapeOblateSpheroid{2.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(capacitance({ShapeProlateSpheroid{1.0, 2.0}}), DomainError);
}

TEST_CASE("Lambda: Dirichlet limit and monotonicity in kappa") {
  auto lam = [](double kappa, double ell, double D) {
    auto spec = validate_or_throw(
        ball_spec(1.0, 0.03, {{Point::Zero(), 1.0}}, kappa));
    spec = validate_or_throw([&] {
      auto ps = spec.spec();
      ps.compartments[0].ell = ell;
      ps.D = D;
      return ps;
    }());
    return solve_model1_3d(spec).coefficients().Lambda[0];
  };
  // kappa -> inf gives Lambda = ell
  auto specd = validate_or_throw(ball_spec(1.0, 0.03, {{Point::Zero(), 1.0}}));
  CHECK(solve_model1_3d(specd).coefficients().Lambda[0] == 1.0);
  CHECK(lam(1e8, 0.8, 1.0) == doctest::Approx(0.8).epsilon(1e-6));
  double prev = 0.0;
  for (double kappa : {0.5, 2.0, 10.0, 100.0}) {
    double v = lam(kappa, 0.8, 1.0);
    CHECK(v > prev);
    CHECK(v < 0.8);
    prev = v;
  }
}

TEST_CASE("zero degradation: far-field constant and solvability") {
  // single compartment: u_inf = c exactly (chi vanishes at the fixed point)
  auto spec1 = validate_or_throw(ball_spec(0.0, 0.03, {{Point::Zero(), 1.7}}, 5.0));
  auto f1 = solve_model1_3d(spec1);
  CHECK(*f1.coefficients().u_inf == doctest::Approx(1.7).epsilon(1e-14));

  // identical boundary values: weighted average collapses to the value
  auto spec2 = validate_or_throw(ball_spec(
      0.0, 0.03,
      {{Point(0.4, 0.0, 0.0), 1.2}, {Point(-0.4, 0.0, 0.0), 1.2}}, 3.0));
  auto f2 = solve_model1_3d(spec2);
  CHECK(*f2.coefficients().u_inf == doctest::Approx(1.2).epsilon(1e-14));

  // asymmetric: the solvability condition holds to round-off
  auto spec3 = validate_or_throw(ball_spec(
      0.0, 0.03,
      {{Point(0.4, 0.0, 0.0), 1.0}, {Point(-0.3, 0.25, 0.0), 2.5}}, 2.0));
  auto f3 = solve_model1_3d(spec3);
  const auto& c = f3.coefficients();
  double resid = 0.0;
  for (int j = 0; j < 2; ++j)
    resid += c.Lambda[j] * (c.c0[j] - *c.u_inf - spec3.epsilon() * c.chi[j]);
  CHECK(std::fabs(resid) <= 1e-12);
  // leading order: u_inf near the Lambda-weighted mean
  double wmean = (c.Lambda[0] * 1.0 + c.Lambda[1] * 2.5) / c.Lambda.sum();
  CHECK(*c.u_inf == doctest::Approx(wmean).epsilon(0.05));
}

TEST_CASE("inner field: decay, interface, Robin residual") {
  const double kappa = 2.0;
  auto spec = validate_or_throw(ball_spec(1.0, 0.04, {{Point::Zero(), 1.5}}, kappa));
  auto f = solve_model1_3d(spec);
  // decay at infinity (gamma0 > 0 branch)
  CHECK(std::fabs(f.eval_inner(0, 1e9)) <= 1e-8);
  // Robin residual of the leading inner term
  const auto& c = f.coefficients();
  double strength = c.Lambda[0] * (c.c0[0] - spec.epsilon() * c.chi[0]);
  double c_eff = c.c0[0] - spec.epsilon() * c.chi[0];
  double flux = -strength / 1.0;  // D dU/drho at rho = ell = 1 (D = 1)
  double robin = flux - kappa * (strength / 1.0 - c_eff);
  CHECK(std::fabs(robin) <= 1e-12);
  CHECK_THROWS_AS(f.eval_inner(0, 0.3), DomainError);
}

TEST_CASE("single Robin compartment converges to the radial oracle") {
  const double kappa = 1.5, c0 = 1.0;
  std::vector<double> epss{0.08, 0.04, 0.02};
  std::vector<double> errs;
  for (double eps : epss) {
    auto spec = validate_or_throw(ball_spec(1.0, eps, {{Point::Zero(), c0}}, kappa));
    auto f = solve_model1_3d(spec);
    RadialProblem rp;
    rp.dim = 3;
    rp.r_in = eps;
    rp.gamma0 = 1.0;
    rp.c0 = c0;
    rp.kappa_phys = kappa / eps;
    auto oracle = radial_exact_sphere(rp);
    double emax = 0.0;
    for (double r : {0.3, 0.5, 0.8}) {
      Point x(r, 0.0, 0.0);
      emax = std::max(emax,
                      std::fabs(f.eval_outer(x) - oracle.u(r)) /
                          std::fabs(oracle.u(r)));
    }
    errs.push_back(emax);
  }
  CHECK(estimate_order(epss, errs) >= 1.7);
  CHECK(errs.back() <= 0.01);
}

TEST_CASE("capacitance substitution: sphere shape is bit identical") {
  auto spec = validate_or_throw(ball_spec(
      1.0, 0.03,
      {{Point(0.3, 0.0, 0.0), 1.0}, {Point(-0.3, 0.1, 0.0), 2.0}}, 4.0));
  auto plain = solve_model1_3d(spec);
  std::vector<std::optional<ShapeSpec>> shapes{
      ShapeSpec{ShapeSphere{1.0}}, ShapeSpec{ShapeSphere{1.0}}};
  auto shaped = solve_model1_3d(spec, shapes);
  for (int j = 0; j < 2; ++j) {
    CHECK(plain.coefficients().Lambda[j] == shaped.coefficients().Lambda[j]);
    CHECK(plain.coefficients().chi[j] == shaped.coefficients().chi[j]);
  }
  Point x(0.0, -0.5, 0.2);
  CHECK(plain.eval_outer(x) == shaped.eval_outer(x));

  // hemispheres shrink the far-field strength and demand a Dirichlet interface
  auto specd = validate_or_throw(ball_spec(
      1.0, 0.03, {{Point(0.3, 0.0, 0.0), 1.0}, {Point(-0.3, 0.1, 0.0), 2.0}}));
  std::vector<std::optional<ShapeSpec>> hemi{ShapeSpec{ShapeHemisphere{1.0}},
                                             std::nullopt};
  auto fh = solve_model1_3d(specd, hemi);
  CHECK(fh.coefficients().Lambda[0] ==
        doctest::Approx(2.0 * (1.0 - 1.0 / std::sqrt(3.0))));
  CHECK(fh.coefficients().Lambda[1] == 1.0);
  CHECK_THROWS_AS(solve_model1_3d(spec, hemi), UnsupportedError);
}

TEST_CASE("model II coefficient: continuity and the fast-diffusion limit") {
  CompartmentSpec c;
  c.ell = 1.0;
  c.kappa = 1.0;
  c.model = ModelII{1.0, 1.0, 1.0};
  auto m = model2_coefficient_3d(c, 1.0);
  // flux continuity at the interface, both equalities
  double fu = m.exterior_flux(m.ell);
  double fv = m.interior_flux(m.ell);
  double jump = c.kappa * (m.exterior_value(m.ell) - m.interior_value(m.ell));
  CHECK(std::fabs(fu - fv) <= 1e-10);
  CHECK(std::fabs(fu - jump) <= 1e-10);

  // Dbar -> inf at fixed beta_bar ell = 1: A -> Lambda Ibar/gammabar
  const double lam = 0.5;  // kappa=1, ell=1, D=1
  double prev = 1e9;
  for (double Dbar : {1e2, 1e4, 1e6}) {
    CompartmentSpec cc = c;
    double gb = Dbar;  // beta_bar = sqrt(gb/Dbar) = 1
    cc.model = ModelII{Dbar, gb, gb};  // Ibar/gammabar = 1
    auto mm = model2_coefficient_3d(cc, 1.0);
    double rel = std::fabs(mm.A - lam) / lam;
    CHECK(rel < prev);
    prev = rel;
  }
  CHECK(prev <= 1e-4);
}

TEST_CASE("model II coefficient against a collocation oracle") {
  // interior two-point problem Dbar (V'' + 2V'/r) - gb V + Ib = 0 on (0, ell)
  // coupled to the decaying exterior A/r, solved by second-order collocation
  const double ell = 1.0, D = 1.0, Dbar = 1.0, gb = 1.0, Ib = 1.0, kappa = 1.0;
  const int n = 4000;
  const double h = ell / n;
  // unknowns: V_0..V_n, A
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 2, n + 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
  // regularity at the origin: V'(0) = 0 via one-sided second order
  M(0, 0) = -3.0;
  M(0, 1) = 4.0;
  M(0, 2) = -1.0;
  for (int i = 1; i < n; ++i) {
    double r = i * h;
    M(i, i - 1) = Dbar * (1.0 / (h * h) - 1.0 / (r * h));
    M(i, i) = -2.0 * Dbar / (h * h) - gb;
    M(i, i + 1) = Dbar * (1.0 / (h * h) + 1.0 / (r * h));
    rhs(i) = -Ib;
  }
  // flux continuity: Dbar V'(ell) = -D A / ell^2
  M(n, n) = Dbar * 3.0 / (2.0 * h);
  M(n, n - 1) = -Dbar * 4.0 / (2.0 * h);
  M(n, n - 2) = Dbar * 1.0 / (2.0 * h);
  M(n, n + 1) = D / (ell * ell);
  // Robin: -D A/ell^2 = kappa (A/ell - V(ell))
  M(n + 1, n + 1) = -D / (ell * ell) - kappa / ell;
  M(n + 1, n) = kappa;
  Eigen::VectorXd sol = M.partialPivLu().solve(rhs);
  double A_oracle = sol(n + 1);

  CompartmentSpec c;
  c.ell = ell;
  c.kappa = kappa;
  c.model = ModelII{Dbar, gb, Ib};
  auto m = model2_coefficient_3d(c, D);
  CHECK(m.A == doctest::Approx(A_oracle).epsilon(1e-6));
  // interior profile agrees too
  CHECK(m.interior_value(0.5) == doctest::Approx(sol(n / 2)).epsilon(1e-6));
}

TEST_CASE("model III: linear closed form, kappa = 0, flux balance") {
  Eigen::VectorXd lam(2), b(2);
  lam << 1.0, 3.0;
  b << 2.0, 0.9;
  auto kin = linear_kinetics(lam, b);

  ProblemSpec ps;
  ps.geometry = Sphere3D{1.0};
  ps.gamma0 = 1.0;
  ps.epsilon = 0.03;
  CompartmentSpec c;
  c.center = Point(0.25, 0.0, 0.0);
  c.kappa = 2.0;
  c.ell = 0.9;
  ModelIII m3;
  m3.K = 2;
  m3.w0 = {0.5, 0.5};
  c.model = m3;
  ps.compartments.push_back(c);
  CompartmentSpec c2 = c;
  c2.center = Point(-0.3, 0.1, 0.0);
  c2.kappa = 0.0;
  ps.compartments.push_back(c2);
  auto spec = validate_or_throw(ps);

  auto roots = solve_model3_3d(spec, kin);
  REQUIRE(roots.size() == 1);
  const auto& w = roots[0].w;
  // compartment 0: (lam0 + 4 pi D Lambda) w0 = b0
  double Lam = 2.0 * 0.81 / (2.0 * 0.9 + 1.0);
  CHECK(w(0, 0) ==
        doctest::Approx(b[0] / (lam[0] + 4.0 * pi * Lam)).epsilon(1e-12));
  CHECK(w(0, 1) == doctest::Approx(b[1] / lam[1]).epsilon(1e-12));
  // compartment 1 (kappa = 0): the isolated kinetics root
  CHECK(w(1, 0) == doctest::Approx(b[0] / lam[0]).epsilon(1e-12));
  CHECK(w(1, 1) == doctest::Approx(b[1] / lam[1]).epsilon(1e-12));

  // flux-balance form: f0(w*) = kappa 4 pi ell^2 (w0 - U(ell))
  Eigen::VectorXd f0 = kin.f(w.row(0).transpose());
  double U_ell = Lam * w(0, 0) / 0.9;
  double flux = 2.0 * 4.0 * pi * 0.81 * (w(0, 0) - U_ell);
  CHECK(std::fabs(f0[0] - flux) <= 1e-10);
  CHECK(std::fabs(f0[1]) <= 1e-10);
}
