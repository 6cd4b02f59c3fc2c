#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "mdiff/greens.hpp"
#include "mdiff/ripening.hpp"

using namespace mdiff;

namespace {
constexpr double pi = std::numbers::pi;

RipeningParams params2d() {
  RipeningParams p;
  p.D = 1.0;
  p.nu = 0.3;
  p.phi_a = 0.1;
  p.phi_b = 1.0;
  return p;
}

RipeningParams params3d() {
  RipeningParams p;
  p.D = 1.0;
  p.phi_a = 0.1;
  p.phi_b = 1.0;
  p.ell_c = 0.1;
  return p;
}

}  // namespace

TEST_CASE("planar law: fixed point, signs, exact area conservation") {
  auto p = params2d();
  Eigen::VectorXd equal = Eigen::VectorXd::Constant(4, 0.7);
  CHECK(rhs_2d(equal, p).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd two(2);
  two << 2.0, 1.0;
  auto r = rhs_2d(two, p);
  CHECK(r[0] > 0.0);
  CHECK(r[1] < 0.0);

  Eigen::VectorXd many(5);
  many << 0.3, 1.2, 0.8, 2.0, 0.5;
  auto rm = rhs_2d(many, p);
  double dsum = 0.0;
  for (int j = 0; j < 5; ++j) dsum += 2.0 * many[j] * rm[j];
  CHECK(std::fabs(dsum) <= 1e-14);

  Eigen::VectorXd bad(2);
  bad << 1.0, -0.1;
  CHECK_THROWS_AS(rhs_2d(bad, p), DomainError);
}

TEST_CASE("spherical law: fixed point, smaller shrinks, volume conservation") {
  auto p = params3d();
  Eigen::VectorXd equal = Eigen::VectorXd::Constant(3, 1.1);
  CHECK(rhs_3d(equal, p).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd two(2);
  two << 2.0, 1.0;
  auto r = rhs_3d(two, p);
  CHECK(r[0] > 0.0);   // above the mean grows
  CHECK(r[1] < 0.0);   // below the mean shrinks

  Eigen::VectorXd many(6);
  many << 0.4, 1.5, 0.9, 2.2, 0.6, 1.0;
  auto rm = rhs_3d(many, p);
  double dsum = 0.0;
  for (int j = 0; j < 6; ++j) dsum += 3.0 * many[j] * many[j] * rm[j];
  CHECK(std::fabs(dsum) <= 1e-14);
}

TEST_CASE("evolve: single droplet is a fixed trajectory") {
  DropletState st;
  st.ell = Eigen::VectorXd::Constant(1, 0.9);
  auto traj = evolve(st, params3d(), 3, 5.0);
  CHECK(traj.final_active == 1);
  CHECK(traj.ell.back()[0] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("evolve: pair coarsens to a single survivor") {
  DropletState st;
  st.ell.resize(2);
  st.ell << 1.2, 0.8;
  auto traj = evolve(st, params3d(), 3, 400.0);
  CHECK(traj.final_active == 1);
  REQUIRE(traj.events.size() == 1);
  CHECK(traj.events[0].index == 1);
  CHECK(traj.conservation_drift <= 1e-8);
  // mass moved to the survivor: ell_1 -> (1.2^3 + 0.8^3 - eps_ext^3)^(1/3)
  double expected = std::cbrt(1.2 * 1.2 * 1.2 + 0.8 * 0.8 * 0.8 -
                              1e-4 * 1e-4 * 1e-4);
  CHECK(traj.ell.back()[0] == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("evolve: N = 4 distinct radii end with one survivor (3D)") {
  DropletState st;
  st.ell.resize(4);
  st.ell << 1.3, 1.0, 0.8, 0.6;
  auto traj = evolve(st, params3d(), 3, 2000.0);
  CHECK(traj.final_active == 1);
  CHECK(traj.events.size() == 3);
  CHECK(traj.conservation_drift <= 1e-8);
  // retirements come smallest-first
  CHECK(traj.events[0].index == 3);
  CHECK(traj.events[1].index == 2);
  CHECK(traj.events[2].index == 1);
}

TEST_CASE("evolve: ordering is preserved while all stay active") {
  DropletState st;
  st.ell.resize(4);
  st.ell << 1.4, 1.1, 0.9, 0.7;
  auto traj = evolve(st, params2d(), 2, 2.0);
  for (size_t i = 0; i < traj.tau.size(); ++i) {
    if (traj.active_count[i] < 4) break;
    for (int j = 0; j + 1 < 4; ++j)
      CHECK(traj.ell[i][j] > traj.ell[i][j + 1]);
  }
}

TEST_CASE("evolve: planar three-droplet run against a fixed-step reference") {
  auto p = params2d();
  DropletState st;
  st.ell.resize(3);
  st.ell << 1.0, 0.8, 0.6;

  // frozen-oracle route: classical RK4 at dt = 1e-6
  Eigen::VectorXd y = st.ell;
  const double dt = 1e-6;
  const double t_end = 0.05;
  long steps = std::lround(t_end / dt);
  for (long s = 0; s < steps; ++s) {
    Eigen::VectorXd k1 = rhs_2d(y, p);
    Eigen::VectorXd k2 = rhs_2d(y + 0.5 * dt * k1, p);
    Eigen::VectorXd k3 = rhs_2d(y + 0.5 * dt * k2, p);
    Eigen::VectorXd k4 = rhs_2d(y + dt * k3, p);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  auto traj = evolve(st, p, 2, t_end, 1e-11);
  CHECK(std::fabs(traj.tau.back() - t_end) <= 1e-12);
  for (int j = 0; j < 3; ++j)
    CHECK(traj.ell.back()[j] == doctest::Approx(y[j]).epsilon(1e-8));
  CHECK(traj.conservation_drift <= 1e-8);
}

TEST_CASE("cluster fixed point: symmetric ring has equal radii") {
  ProblemSpec ps;
  ps.geometry = Disk2D{1.0};
  ps.gamma0 = 1.0;
  ps.I0 = 1.0;
  ps.epsilon = 0.05;
  for (int k = 0; k < 4; ++k) {
    CompartmentSpec c;
    double th = 2.0 * pi * k / 4.0;
    c.center = Point(0.5 * std::cos(th), 0.5 * std::sin(th), 0.0);
    c.model = ModelI{0.0};
    ps.compartments.push_back(c);
  }
  auto spec = validate_or_throw(ps);
  auto fp = cluster_fixed_point(spec, 400.0);
  CHECK(fp.residual.cwiseAbs().maxCoeff() <= 1e-8);
  for (int j = 1; j < 4; ++j)
    CHECK(fp.ell[j] == doctest::Approx(fp.ell[0]).epsilon(1e-10));
  CHECK(fp.ell[0] > 0.0);

  // stronger interior turnover forces smaller balancing radii
  auto fp2 = cluster_fixed_point(spec, 4000.0);
  CHECK(fp2.ell[0] < fp.ell[0]);
  auto fp3 = cluster_fixed_point(spec, 40000.0);
  CHECK(fp3.ell[0] < fp2.ell[0]);
}

TEST_CASE("cluster fixed point: asymmetric pair against a bisection oracle") {
  ProblemSpec ps;
  ps.geometry = Disk2D{1.0};
  ps.gamma0 = 1.0;
  ps.I0 = 1.0;
  ps.epsilon = 0.05;
  CompartmentSpec c1, c2;
  c1.center = Point(0.45, 0.0, 0.0);
  c1.model = ModelI{0.0};
  c2.center = Point(-0.25, 0.0, 0.0);
  c2.model = ModelI{0.0};
  ps.compartments.push_back(c1);
  ps.compartments.push_back(c2);
  auto spec = validate_or_throw(ps);
  const double u0 = 600.0;
  auto fp = cluster_fixed_point(spec, u0);

  // oracle: nested bisection on the two balance residuals, with strengths
  // computed from scratch out of pointwise Green's evaluations
  const auto& psc = spec.spec();
  const double nu = spec.nu();
  DiskHelmholtzGreens G(1.0, 1.0, 1.0);
  auto strengths = [&](double l1, double l2) {
    Eigen::Matrix2d M;
    M(0, 0) = 2.0 * pi * G.regular_at(c1.center) - std::log(l1);
    M(1, 1) = 2.0 * pi * G.regular_at(c2.center) - std::log(l2);
    M(0, 1) = M(1, 0) = 2.0 * pi * G.eval(c1.center, c2.center).value;
    Eigen::Matrix2d T = Eigen::Matrix2d::Identity() + nu * M;
    Eigen::Vector2d rhs(psc.I0 / psc.gamma0, psc.I0 / psc.gamma0);
    return Eigen::Vector2d(T.partialPivLu().solve(rhs));
  };
  auto residual = [&](int j, double l1, double l2) {
    Eigen::Vector2d A = strengths(l1, l2);
    double l = j == 0 ? l1 : l2;
    return 2.0 * pi * nu * A[j] -
           psc.gamma0 * u0 * pi * psc.epsilon * psc.epsilon * l * l;
  };
  auto solve_l2 = [&](double l1) {
    double lo = 1e-4, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (residual(1, l1, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  double lo = 1e-4, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (residual(0, mid, solve_l2(mid)) > 0.0 ? lo : hi) = mid;
  }
  double l1 = 0.5 * (lo + hi), l2 = solve_l2(l1);
  CHECK(fp.ell[0] == doctest::Approx(l1).epsilon(1e-7));
  CHECK(fp.ell[1] == doctest::Approx(l2).epsilon(1e-7));
}
