#include "mdiff/steady3d.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

// x cosh(x) - sinh(x), series below x = 0.5 to dodge the cancellation
double xcosh_minus_sinh(double x) {
  if (std::fabs(x) < 0.5) {
    double x2 = x * x;
    return x * x2 *
           (1.0 / 3.0 +
            x2 * (1.0 / 30.0 +
                  x2 * (1.0 / 840.0 +
                        x2 * (1.0 / 45360.0 + x2 / 3991680.0))));
  }
  return x * std::cosh(x) - std::sinh(x);
}

double lambda_coefficient(double kappa, double ell, double D) {
  if (std::isinf(kappa)) return ell;
  return kappa * ell * ell / (kappa * ell + D);
}

double source_shift3(const ProblemSpec& ps) {
  return ps.I0 > 0.0 ? ps.I0 / ps.gamma0 : 0.0;
}

}  // namespace

double capacitance(const ShapeSpec& shape) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ShapeSphere>) {
          if (!(s.a > 0.0)) throw DomainError("sphere radius must be > 0");
          return s.a;
        } else if constexpr (std::is_same_v<T, ShapeHemisphere>) {
          if (!(s.a > 0.0)) throw DomainError("hemisphere radius must be > 0");
          return 2.0 * s.a * (1.0 - 1.0 / std::sqrt(3.0));
        } else if constexpr (std::is_same_v<T, ShapeProlateSpheroid>) {
          if (!(s.b > 0.0) || s.a < s.b)
            throw DomainError("prolate spheroid requires a >= b > 0");
          if (s.a == s.b) return s.a;  // sphere limit
          return std::sqrt(s.a * s.a - s.b * s.b) / std::acosh(s.a / s.b);
        } else {
          if (!(s.b > 0.0) || s.a < s.b)
            throw DomainError("oblate spheroid requires a >= b > 0");
          if (s.a == s.b) return s.a;
          // The printed form divides by cosh^-1(b/a); with b < a the
          // argument is below 1 and the expression is not real. Surface the
          // problem instead of substituting the inverse-cosine variant.
          throw DomainError(
              "oblate capacitance as printed uses cosh^-1(b/a), undefined for "
              "b < a; no real value to return");
        }
      },
      shape.shape);
}

SteadyField3D::SteadyField3D(ValidatedSpec spec, Coefficients3D coef,
                             GreensFunction G, double shift)
    : spec_(std::move(spec)), coef_(std::move(coef)), G_(std::move(G)),
      shift_(shift) {}

double SteadyField3D::eval_outer(const Point& x) const {
  const auto& ps = spec_.spec();
  const double eps = ps.epsilon;
  for (int j = 0; j < spec_.n_compartments(); ++j) {
    double d = (x - ps.compartments[j].center).norm();
    if (d < 2.0 * eps * ps.compartments[j].ell) {
      std::ostringstream msg;
      msg << "point is within 2 eps of compartment " << j
          << "; use eval_inner there";
      throw NearCompartmentError(msg.str(), j);
    }
  }
  const double uinf = coef_.u_inf ? (*coef_.u_inf - shift_) : 0.0;
  double s = 0.0;
  for (int k = 0; k < spec_.n_compartments(); ++k) {
    double strength = coef_.c0[k] - shift_ - uinf - eps * coef_.chi[k];
    s += coef_.Lambda[k] * strength *
         G_.eval(x, ps.compartments[k].center).value;
  }
  return uinf + 4.0 * pi * ps.D * eps * s + shift_;
}

double SteadyField3D::eval_inner(int j, double rho) const {
  const auto& ps = spec_.spec();
  const auto& c = ps.compartments.at(j);
  if (rho < c.ell)
    throw DomainError("eval_inner: rho < ell_j lies inside the compartment");
  const double eps = ps.epsilon;
  const double uinf = coef_.u_inf ? (*coef_.u_inf - shift_) : 0.0;
  double strength = coef_.c0[j] - shift_ - uinf - eps * coef_.chi[j];
  return uinf + coef_.Lambda[j] / rho * strength + shift_;
}

SteadyField3D solve_model1_3d(
    const ValidatedSpec& spec,
    const std::vector<std::optional<ShapeSpec>>& shapes) {
  const auto& ps = spec.spec();
  if (!std::holds_alternative<Sphere3D>(ps.geometry))
    throw UnsupportedError("solve_model1_3d requires the ball geometry");
  const int n = spec.n_compartments();
  if (n == 0) throw UnsupportedError("spec has no compartments");
  if (!shapes.empty() && static_cast<int>(shapes.size()) != n)
    throw DomainError("shapes list must match the compartment count");

  const double shift = source_shift3(ps);
  Eigen::VectorXd Lambda(n), c0(n);
  for (int j = 0; j < n; ++j) {
    const auto& c = ps.compartments[j];
    const auto* m1 = std::get_if<ModelI>(&c.model);
    if (!m1)
      throw UnsupportedError(
          "solve_model1_3d handles model I compartments; use "
          "model2_coefficient_3d / solve_model3_3d for the others");
    c0[j] = m1->c0;
    double eff_ell = c.ell;
    if (!shapes.empty() && shapes[j]) {
      const bool is_sphere =
          std::holds_alternative<ShapeSphere>(shapes[j]->shape);
      if (!is_sphere && !std::isinf(c.kappa))
        throw UnsupportedError(
            "capacitance substitution covers the Dirichlet far-field problem "
            "only; non-spherical compartments require kappa = inf");
      eff_ell = capacitance(*shapes[j]);
    }
    Lambda[j] = lambda_coefficient(c.kappa, eff_ell, ps.D);
  }

  GreensFunction G;
  if (ps.gamma0 > 0.0)
    G = make_helmholtz_greens(ps.geometry, ps.D, ps.gamma0);
  else
    G = make_laplace_greens(ps.geometry, ps.D);

  // interaction matrix without the planar log shift: off-diagonal values,
  // regular part on the diagonal
  Eigen::MatrixXd Gm(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v =
          G.eval(ps.compartments[i].center, ps.compartments[j].center).value;
      Gm(i, j) = v;
      Gm(j, i) = v;
    }
    Gm(i, i) = G.regular_at(ps.compartments[i].center);
  }

  Coefficients3D coef;
  coef.Lambda = Lambda;
  coef.c0 = c0;
  coef.epsilon = ps.epsilon;
  Eigen::VectorXd c_eff = c0.array() - shift;

  if (ps.gamma0 > 0.0) {
    coef.chi = 4.0 * pi * ps.D * (Gm * Lambda.cwiseProduct(c_eff));
  } else {
    // chi is evaluated with the leading-order far-field constant, then the
    // constant is updated once (two-pass fixed point)
    double lsum = Lambda.sum();
    if (!(lsum > 0.0))
      throw ConditioningError("all Lambda vanish; far-field constant undefined",
                              0.0);
    double u0 = Lambda.dot(c_eff) / lsum;
    Eigen::VectorXd shifted = c_eff.array() - u0;
    coef.chi = 4.0 * pi * ps.D * (Gm * Lambda.cwiseProduct(shifted));
    double u1 = Lambda.dot(c_eff - ps.epsilon * coef.chi) / lsum;
    coef.u_inf = u1 + shift;  // shift = 0 when gamma0 = 0
  }
  return SteadyField3D(spec, std::move(coef), std::move(G), shift);
}

double Model2Coefficient3D::exterior_value(double rho) const {
  if (rho < ell) throw DomainError("exterior_value: rho < ell");
  return A / rho;
}

double Model2Coefficient3D::interior_value(double rho) const {
  if (rho < 0.0 || rho > ell)
    throw DomainError("interior_value: rho outside [0, ell]");
  double sinhc = rho == 0.0 ? beta_bar : std::sinh(beta_bar * rho) / rho;
  return c0 + B * sinhc;
}

double Model2Coefficient3D::interior_flux(double rho) const {
  if (rho <= 0.0 || rho > ell)
    throw DomainError("interior_flux: rho outside (0, ell]");
  double x = beta_bar * rho;
  return Dbar * B * (beta_bar * std::cosh(x) - std::sinh(x) / rho) / rho;
}

double Model2Coefficient3D::exterior_flux(double rho) const {
  if (rho < ell) throw DomainError("exterior_flux: rho < ell");
  return -D * A / (rho * rho);
}

Model2Coefficient3D model2_coefficient_3d(const CompartmentSpec& comp,
                                          double D) {
  const auto* m2 = std::get_if<ModelII>(&comp.model);
  if (!m2)
    throw UnsupportedError("model2_coefficient_3d needs a model II payload");
  if (!(m2->gammabar > 0.0))
    throw UnsupportedError(
        "model II with gammabar = 0 has no interior steady state");
  Model2Coefficient3D out;
  out.ell = comp.ell;
  out.D = D;
  out.Dbar = m2->Dbar;
  out.kappa = comp.kappa;
  out.c0 = m2->Ibar / m2->gammabar;
  out.beta_bar = std::sqrt(m2->gammabar / m2->Dbar);

  const double x = out.beta_bar * comp.ell;
  const double E = xcosh_minus_sinh(x);
  const double S = std::sinh(x);
  const double lam = lambda_coefficient(comp.kappa, comp.ell, D);
  out.A = m2->Dbar * E /
          (D / comp.ell * S + m2->Dbar / lam * E) * out.c0;
  out.B = -D * out.A / (m2->Dbar * E);
  return out;
}

std::vector<Model3Root3> solve_model3_3d(const ValidatedSpec& spec,
                                         const Kinetics& kin) {
  const auto& ps = spec.spec();
  if (!std::holds_alternative<Sphere3D>(ps.geometry))
    throw UnsupportedError("solve_model3_3d requires the ball geometry");
  const int n = spec.n_compartments();
  const int K = kin.K;

  Eigen::MatrixXd w(n, K);
  std::vector<double> history;
  for (int j = 0; j < n; ++j) {
    const auto& c = ps.compartments[j];
    const double lam = lambda_coefficient(c.kappa, c.ell, ps.D);
    const double coupling = 4.0 * pi * ps.D * lam;

    Eigen::VectorXd g = Eigen::VectorXd::Constant(K, 0.5);
    if (const auto* m3 = std::get_if<ModelIII>(&c.model))
      if (static_cast<int>(m3->w0.size()) == K)
        for (int a = 0; a < K; ++a) g[a] = m3->w0[a];

    Eigen::VectorXd wj = g;
    // steady flux balance: the kinetics feed the leak through the membrane,
    // f_a(w*) - 4 pi D Lambda w*_0 delta_{a,0} = 0
    auto F = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd f = kin.f(v);
      f[0] -= coupling * v[0];
      return f;
    };
    Eigen::VectorXd Fv = F(wj);
    double fn = Fv.norm();
    for (int it = 0; it < 200 && fn > 1e-12; ++it) {
      Eigen::MatrixXd Jm = kin.jacobian(wj);
      Jm(0, 0) -= coupling;
      Eigen::VectorXd step = Jm.partialPivLu().solve(-Fv);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool accepted = false;
      while (lambda >= 1.0 / 1024.0) {
        Eigen::VectorXd wt = wj + lambda * step;
        Eigen::VectorXd Ft = F(wt);
        if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * lambda) * fn) {
          wj = wt;
          Fv = Ft;
          fn = Fv.norm();
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    history.push_back(fn);
    if (fn > 1e-10)
      throw ConvergenceError("solve_model3_3d: Newton stalled on compartment " +
                                 std::to_string(j),
                             history);
    w.row(j) = wj.transpose();
  }
  double res = 0.0;
  for (double h : history) res = std::max(res, h);
  return {Model3Root3{w, res}};
}

}  // namespace mdiff
