#include "mdiff/accumulation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mdiff/greens.hpp"
#include "mdiff/quadrature.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;
}

InitialCondition constant_ic(double c) {
  if (c < 0.0) throw DomainError("initial condition must be >= 0");
  InitialCondition ic;
  ic.is_constant = true;
  ic.constant_value = c;
  ic.u0 = [c](const Point&) { return c; };
  return ic;
}

InitialCondition gaussian_bump_ic(const Point& center, double width,
                                  double amplitude, double support_radius) {
  if (!(width > 0.0) || amplitude < 0.0)
    throw DomainError("gaussian bump needs width > 0 and amplitude >= 0");
  InitialCondition ic;
  ic.support_center = center;
  ic.support_radius = support_radius > 0.0 ? support_radius : 5.0 * width;
  const double r2cut = ic.support_radius * ic.support_radius;
  ic.u0 = [=](const Point& x) {
    double d2 = (x - center).squaredNorm();
    if (d2 >= r2cut) return 0.0;
    return amplitude * std::exp(-0.5 * d2 / (width * width));
  };
  return ic;
}

double accumulation_time_1d(double x, double gamma0, double D) {
  if (!(gamma0 > 0.0))
    throw UnsupportedError("accumulation time requires gamma0 > 0");
  if (!(D > 0.0) || x < 0.0)
    throw DomainError("accumulation_time_1d needs D > 0 and x >= 0");
  return (1.0 + std::sqrt(gamma0 / D) * x) / (2.0 * gamma0);
}

namespace {

// s u~(x, s) for the flux-fed interval [0, L] with a reflecting far end,
// normalized by the boundary flux. Written with decaying exponentials so L
// can be large: cosh((L-x)/xi)/sinh(L/xi) =
//   e^{-x/xi} (1 + e^{-2(L-x)/xi}) / (1 - e^{-2L/xi}).
double s_utilde_1d(double x, double s, double gamma0, double D, double L) {
  double xi = std::sqrt(D / (gamma0 + s));
  double ratio = std::exp(-x / xi) * (1.0 + std::exp(-2.0 * (L - x) / xi)) /
                 (1.0 - std::exp(-2.0 * L / xi));
  return xi / D * ratio;
}

}  // namespace

double accumulation_time_1d_laplace(double x, double gamma0, double D,
                                    double L) {
  if (!(gamma0 > 0.0))
    throw UnsupportedError("accumulation time requires gamma0 > 0");
  if (!(L > x) || x < 0.0)
    throw DomainError("accumulation_time_1d_laplace needs 0 <= x < L");
  const double u = s_utilde_1d(x, 0.0, gamma0, D, L);
  const double h = 1e-5 * gamma0;
  auto d = [&](double hh) {
    return (s_utilde_1d(x, hh, gamma0, D, L) -
            s_utilde_1d(x, -hh, gamma0, D, L)) /
           (2.0 * hh);
  };
  double dh = d(h), dh2 = d(0.5 * h);
  // flux-fed interval, u(x,0) = 0: the concentration accumulates from below,
  // so the plain (unreversed) definition applies, T = -(d/ds)[s u~]/u
  return -(4.0 * dh2 - dh) / 3.0 / u;
}

namespace {

// Quadrature of f over the domain in polar/spherical coordinates centred at
// p; the ray length to the outer boundary has a closed form for the disk and
// ball. Handles integrable singularities of f at p.
double integrate_from_point_disk(const std::function<double(const Point&)>& f,
                                 const Point& p, double R, int nr, int nth) {
  const auto& rule = quad::gauss_legendre(nr);
  double total = 0.0;
  const double px = p[0], py = p[1];
  const double p2 = px * px + py * py;
  for (int j = 0; j < nth; ++j) {
    double th = 2.0 * pi * (j + 0.5) / nth;
    double ex = std::cos(th), ey = std::sin(th);
    double b = px * ex + py * ey;
    double rho_max = -b + std::sqrt(b * b + R * R - p2);
    // split the ray: a short panel near the singular point, then the rest
    double split = std::min(0.1 * R, 0.25 * rho_max);
    for (int panel = 0; panel < 2; ++panel) {
      double a0 = panel == 0 ? 0.0 : split;
      double a1 = panel == 0 ? split : rho_max;
      for (int i = 0; i < nr; ++i) {
        double rho = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * rule.x[i];
        double w = 0.5 * (a1 - a0) * rule.w[i];
        Point q(px + rho * ex, py + rho * ey, 0.0);
        total += w * rho * f(q) * (2.0 * pi / nth);
      }
    }
  }
  return total;
}

double integrate_from_point_ball(const std::function<double(const Point&)>& f,
                                 const Point& p, double R, int nr, int nct,
                                 int nph) {
  const auto& rr = quad::gauss_legendre(nr);
  const auto& rc = quad::gauss_legendre(nct);
  double total = 0.0;
  const double p2 = p.squaredNorm();
  for (int a = 0; a < nct; ++a) {
    double ct = rc.x[a], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b0 = 0; b0 < nph; ++b0) {
      double ph = 2.0 * pi * (b0 + 0.5) / nph;
      Point e(st * std::cos(ph), st * std::sin(ph), ct);
      double b = p.dot(e);
      double rho_max = -b + std::sqrt(b * b + R * R - p2);
      double split = std::min(0.1 * R, 0.25 * rho_max);
      for (int panel = 0; panel < 2; ++panel) {
        double a0 = panel == 0 ? 0.0 : split;
        double a1 = panel == 0 ? split : rho_max;
        for (int i = 0; i < nr; ++i) {
          double rho = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * rr.x[i];
          double w = 0.5 * (a1 - a0) * rr.w[i];
          Point q = p + rho * e;
          total += w * rho * rho * f(q) * rc.w[a] * (2.0 * pi / nph);
        }
      }
    }
  }
  return total;
}

}  // namespace

double gamma0_projection(const InitialCondition& ic, const Point& x, double s,
                         const DomainGeometry& g, double D, double gamma0,
                         double rel_tol) {
  const double rate = gamma0 + s;
  if (!(rate > 0.0))
    throw UnsupportedError("gamma0_projection requires gamma0 + s > 0");
  GreensFunction G = make_helmholtz_greens(g, D, rate);
  auto f = [&](const Point& xp) {
    double w = ic.u0(xp);
    if (w == 0.0) return 0.0;
    return G.eval(x, xp).value * w;
  };
  const int dim = dimension(g);

  // does the evaluation point sit inside (or near) the support?
  bool near_support =
      ic.is_constant ||
      (x - ic.support_center).norm() < ic.support_radius + 1e-12;

  double prev = 0.0;
  int order = std::max(16, ic.quad_order / 2);
  for (int pass = 0; pass < 5; ++pass) {
    double val;
    if (dim == 2) {
      const double R = std::get<Disk2D>(g).radius;
      if (near_support) {
        val = integrate_from_point_disk(f, x, R, order, 4 * order);
      } else {
        val = quad::integrate_disk(f, ic.support_center, ic.support_radius,
                                   order, 4 * order);
      }
    } else {
      const double R = std::get<Sphere3D>(g).R0;
      if (near_support) {
        val = integrate_from_point_ball(f, x, R, order, order, 2 * order);
      } else {
        val = quad::integrate_ball(f, ic.support_center, ic.support_radius,
                                   order, order, 2 * order);
      }
    }
    if (pass > 0 && std::fabs(val - prev) <= rel_tol * std::fabs(val))
      return val;
    prev = val;
    order *= 2;
    if (order > 512)
      throw AccuracyError("gamma0_projection quadrature did not reach the "
                          "requested tolerance");
  }
  return prev;
}

namespace {

struct Strengths2D {
  Eigen::VectorXd A;       // steady strengths
  Eigen::VectorXd Aprime;  // d/ds of s A~(s) at s = 0
  Eigen::MatrixXd Tinv;
  Eigen::VectorXd c0;
};

void require_model1_accum(const ProblemSpec& ps) {
  if (!(ps.gamma0 > 0.0))
    throw UnsupportedError(
        "accumulation times are restricted to gamma0 > 0; the zero-degradation "
        "Laplace pole is out of scope");
  if (ps.I0 != 0.0)
    throw UnsupportedError("accumulation times assume I0 = 0");
  for (const auto& c : ps.compartments)
    if (!std::holds_alternative<ModelI>(c.model))
      throw UnsupportedError(
          "accumulation times are implemented for model I compartments");
}

void check_support_clear(const ValidatedSpec& spec,
                         const InitialCondition& ic) {
  if (ic.is_constant) return;
  const auto& ps = spec.spec();
  for (size_t j = 0; j < ps.compartments.size(); ++j) {
    const auto& c = ps.compartments[j];
    double d = (ic.support_center - c.center).norm();
    double rho = ps.epsilon * c.ell;
    bool overlap = d - rho <= ic.support_radius && d + rho >= ic.support_inner;
    if (overlap) {
      std::ostringstream msg;
      msg << "initial-condition support overlaps the neighbourhood of "
             "compartment "
          << j;
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

AccumulationResult accumulation_time_2d(const ValidatedSpec& spec,
                                        const InitialCondition& ic,
                                        const Point& x) {
  const auto& ps = spec.spec();
  if (!std::holds_alternative<Disk2D>(ps.geometry))
    throw UnsupportedError("accumulation_time_2d requires the disk geometry");
  require_model1_accum(ps);
  check_support_clear(spec, ic);
  const int n = spec.n_compartments();
  const double nu = spec.nu();
  const double D = ps.D;

  Eigen::VectorXd c0(n), Psi(n);
  for (int j = 0; j < n; ++j) {
    const auto& c = ps.compartments[j];
    c0[j] = std::get<ModelI>(c.model).c0;
    Psi[j] = std::isinf(c.kappa) ? 0.0 : D / (c.kappa * c.ell);
  }
  if (c0.cwiseAbs().maxCoeff() < 1e-300)
    throw DomainError("accumulation time degenerate: all c0 vanish");

  auto matrix_at = [&](double s) {
    InteractionMatrix Gm = build_interaction_matrix(spec, GreensMode::Helmholtz, s);
    Eigen::MatrixXd M = Psi.asDiagonal();
    M += 2.0 * pi * D * Gm.G;
    return M;
  };

  Eigen::MatrixXd M0 = matrix_at(0.0);
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n) + nu * M0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
  Eigen::VectorXd A = lu.solve(-c0);

  // M'(0) by central differences with one Richardson level
  const double h = 1e-3 * std::max(ps.gamma0, 1.0);
  Eigen::MatrixXd d1 = (matrix_at(h) - matrix_at(-h)) / (2.0 * h);
  Eigen::MatrixXd d2 = (matrix_at(0.5 * h) - matrix_at(-0.5 * h)) / h;
  Eigen::MatrixXd Mp = (4.0 * d2 - d1) / 3.0;

  Eigen::VectorXd gamma_vec(n);
  for (int j = 0; j < n; ++j)
    gamma_vec[j] = gamma0_projection(ic, ps.compartments[j].center, 0.0,
                                     ps.geometry, D, ps.gamma0);
  Eigen::VectorXd Aprime =
      nu * lu.solve(Mp * lu.solve(c0)) + lu.solve(gamma_vec);

  GreensFunction G = make_helmholtz_greens(ps.geometry, D, ps.gamma0);
  double gx = gamma0_projection(ic, x, 0.0, ps.geometry, D, ps.gamma0);

  double sumAG = 0.0, sumApG = 0.0, sumAH = 0.0, sumCG = 0.0;
  for (int k = 0; k < n; ++k) {
    const Point& xk = ps.compartments[k].center;
    double Gk = G.eval(x, xk).value;
    auto Hd = helmholtz_s_derivative(ps.geometry, D, ps.gamma0, x, xk, 0.0, h);
    sumAG += A[k] * Gk;
    sumApG += Aprime[k] * Gk;
    sumAH += A[k] * Hd.value;
    sumCG += c0[k] * Gk;
  }
  const double u_steady = -2.0 * pi * nu * D * sumAG;
  if (std::fabs(u_steady) < 1e-300)
    throw DomainError("accumulation time degenerate: steady field vanishes");

  AccumulationResult out;
  out.u_steady = u_steady;
  out.correction = -2.0 * pi * nu * D * (sumApG + sumAH);
  out.T = (gx + out.correction) / u_steady;
  out.T_leading = gx / (2.0 * pi * nu * D * sumCG);
  return out;
}

AccumulationResult accumulation_time_3d(const ValidatedSpec& spec,
                                        const InitialCondition& ic,
                                        const Point& x) {
  const auto& ps = spec.spec();
  if (!std::holds_alternative<Sphere3D>(ps.geometry))
    throw UnsupportedError("accumulation_time_3d requires the ball geometry");
  require_model1_accum(ps);
  check_support_clear(spec, ic);
  const int n = spec.n_compartments();
  const double D = ps.D, eps = ps.epsilon;

  const auto& ball = std::get<Sphere3D>(ps.geometry);
  SphereHelmholtzGreens G(ball.R0, D, ps.gamma0);

  Eigen::VectorXd c0(n), Lambda(n);
  for (int j = 0; j < n; ++j) {
    const auto& c = ps.compartments[j];
    c0[j] = std::get<ModelI>(c.model).c0;
    Lambda[j] = std::isinf(c.kappa)
                    ? c.ell
                    : c.kappa * c.ell * c.ell / (c.kappa * c.ell + D);
  }
  if (c0.cwiseAbs().maxCoeff() < 1e-300)
    throw DomainError("accumulation time degenerate: all c0 vanish");

  double gx = gamma0_projection(ic, x, 0.0, ps.geometry, D, ps.gamma0);
  double denom = 0.0, corr = 0.0;
  for (int k = 0; k < n; ++k) {
    const Point& xk = ps.compartments[k].center;
    double Gk = G.eval(x, xk).value;
    double Hk = G.ds_value(x, xk);
    double gk = gamma0_projection(ic, xk, 0.0, ps.geometry, D, ps.gamma0);
    denom += Lambda[k] * c0[k] * Gk;
    corr += Lambda[k] * (c0[k] * Hk - gk * Gk);
  }
  denom *= 4.0 * pi * D * eps;
  corr *= 4.0 * pi * D * eps;
  if (std::fabs(denom) < 1e-300)
    throw DomainError("accumulation time degenerate: steady field vanishes");

  AccumulationResult out;
  out.u_steady = denom;
  out.correction = corr;
  out.T = (gx + corr) / denom;
  out.T_leading = gx / denom;
  return out;
}

}  // namespace mdiff
