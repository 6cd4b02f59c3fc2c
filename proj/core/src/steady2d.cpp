#include "mdiff/steady2d.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mdiff/special.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

double psi_model1(double D, double kappa, double ell) {
  if (std::isinf(kappa)) return 0.0;
  if (kappa == 0.0)
    throw UnsupportedError("kappa = 0 gives a reflecting compartment with no "
                           "steady coupling; remove it from the spec");
  return D / (kappa * ell);
}

// Interface constants (c0, Psi) for a model I or II compartment.
std::pair<double, double> interface_constants(const CompartmentSpec& c,
                                              double D) {
  if (const auto* m1 = std::get_if<ModelI>(&c.model)) {
    return {m1->c0, psi_model1(D, c.kappa, c.ell)};
  }
  if (std::holds_alternative<ModelII>(c.model)) {
    auto mc = model2_constants_2d(c, D);
    return {mc.c0, mc.psi};
  }
  throw UnsupportedError(
      "model III compartments require solve_model3_2d, not the linear solve");
}

double source_shift(const ProblemSpec& ps) {
  if (ps.I0 > 0.0) return ps.I0 / ps.gamma0;  // gamma0 > 0 by validation
  return 0.0;
}

}  // namespace

double Model2Constants2D::phibar(double nuA) const {
  return nuA * D / (Dbar * interface_F(beta_bar * ell));
}

double Model2Constants2D::interior_value(double rho, double nuA) const {
  if (rho < 0.0 || rho > ell)
    throw DomainError("interior_value: rho outside [0, ell]");
  using special::bessel_i;
  return c0 + phibar(nuA) * bessel_i(0, beta_bar * rho) /
                  bessel_i(0, beta_bar * ell);
}

double Model2Constants2D::interior_flux(double rho, double nuA) const {
  if (rho < 0.0 || rho > ell)
    throw DomainError("interior_flux: rho outside [0, ell]");
  using special::bessel_i;
  return Dbar * phibar(nuA) * beta_bar * bessel_i(1, beta_bar * rho) /
         bessel_i(0, beta_bar * ell);
}

Model2Constants2D model2_constants_2d(const CompartmentSpec& comp, double D) {
  const auto* m2 = std::get_if<ModelII>(&comp.model);
  if (!m2) throw UnsupportedError("model2_constants_2d needs a model II payload");
  if (!(m2->gammabar > 0.0))
    throw UnsupportedError(
        "model II with gammabar = 0 has no interior steady state");
  Model2Constants2D out;
  out.ell = comp.ell;
  out.D = D;
  out.Dbar = m2->Dbar;
  out.kappa = comp.kappa;
  out.Ibar = m2->Ibar;
  out.gammabar = m2->gammabar;
  out.beta_bar = std::sqrt(m2->gammabar / m2->Dbar);
  out.c0 = m2->Ibar / m2->gammabar;
  double first = std::isinf(comp.kappa) ? 0.0 : D / (comp.kappa * comp.ell);
  out.psi = first + D / (m2->Dbar * interface_F(out.beta_bar * comp.ell));
  return out;
}

Coefficients2D solve_strengths_2d(const ValidatedSpec& spec,
                                  const Eigen::VectorXd& c0,
                                  const Eigen::VectorXd& Psi,
                                  const InteractionMatrix& Gm) {
  const auto& ps = spec.spec();
  const int n = Gm.N;
  const double nu = spec.nu();
  const double shift = source_shift(ps);

  Eigen::MatrixXd M = Psi.asDiagonal();
  M += 2.0 * pi * ps.D * Gm.G;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n) + nu * M;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);

  Coefficients2D out;
  out.nu = nu;
  out.Psi = Psi;
  out.c0 = c0;
  Eigen::VectorXd c_eff = c0.array() - shift;

  auto check_solve = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
    double res = (T * x - rhs).norm();
    double scale = std::max(1.0, rhs.norm());
    if (!x.allFinite() || res > 1e-10 * scale) {
      double cond = T.norm() * lu.inverse().norm();
      std::ostringstream msg;
      msg << "strength system is ill-conditioned (residual " << res
          << ", cond ~ " << cond << ")";
      throw ConditioningError(msg.str(), cond);
    }
    return res;
  };

  if (ps.gamma0 > 0.0) {
    Eigen::VectorXd a = lu.solve(-c_eff);
    out.solve_residual = check_solve(a, -c_eff);
    out.A = a;
  } else {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd b1 = lu.solve(ones);
    Eigen::VectorXd bc = lu.solve(c_eff);
    out.solve_residual = std::max(check_solve(b1, ones), check_solve(bc, c_eff));
    double denom = ones.dot(b1);
    if (std::fabs(denom) < 1e-14)
      throw ConditioningError("zero-degradation constraint is degenerate",
                              1.0 / std::fabs(denom));
    double u_inf = ones.dot(bc) / denom;
    out.u_inf = u_inf + shift;  // shift = 0 here by validation
    out.A = u_inf * b1 - bc;
  }
  return out;
}

SteadyField2D::SteadyField2D(ValidatedSpec spec, Coefficients2D coef,
                             GreensFunction G, double shift)
    : spec_(std::move(spec)), coef_(std::move(coef)), G_(std::move(G)),
      shift_(shift) {}

double SteadyField2D::eval_outer(const Point& x) const {
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
  double s = 0.0;
  for (int k = 0; k < spec_.n_compartments(); ++k)
    s += coef_.A[k] * G_.eval(x, ps.compartments[k].center).value;
  double base = coef_.u_inf ? (*coef_.u_inf - shift_) : 0.0;
  return base - 2.0 * pi * coef_.nu * ps.D * s + shift_;
}

double SteadyField2D::eval_inner(int j, double rho) const {
  const auto& ps = spec_.spec();
  const auto& c = ps.compartments.at(j);
  if (rho < c.ell)
    throw DomainError("eval_inner: rho < ell_j lies inside the compartment");
  double phi = coef_.c0[j] + coef_.nu * coef_.A[j] * coef_.Psi[j];
  return phi + coef_.nu * coef_.A[j] * std::log(rho / c.ell) + shift_;
}

SteadyField2D solve_model1_2d(const ValidatedSpec& spec) {
  const auto& ps = spec.spec();
  if (dimension(ps.geometry) != 2)
    throw UnsupportedError("solve_model1_2d requires a planar geometry");
  const int n = spec.n_compartments();
  if (n == 0) throw UnsupportedError("spec has no compartments");
  Eigen::VectorXd c0(n), Psi(n);
  for (int j = 0; j < n; ++j) {
    auto [c, psi] = interface_constants(ps.compartments[j], ps.D);
    c0[j] = c;
    Psi[j] = psi;
  }
  GreensFunction G;
  InteractionMatrix Gm;
  if (ps.gamma0 > 0.0) {
    G = make_helmholtz_greens(ps.geometry, ps.D, ps.gamma0);
    Gm = build_interaction_matrix(spec, GreensMode::Helmholtz, 0.0);
  } else {
    G = make_laplace_greens(ps.geometry, ps.D);
    Gm = build_interaction_matrix(spec, GreensMode::Laplace);
  }
  auto coef = solve_strengths_2d(spec, c0, Psi, Gm);
  return SteadyField2D(spec, std::move(coef), std::move(G), source_shift(ps));
}

double receptor_count(const SteadyField2D& field, int j) {
  const auto& ps = field.spec().spec();
  const auto& c = ps.compartments.at(j);
  const auto* m2 = std::get_if<ModelII>(&c.model);
  if (!m2) throw UnsupportedError("receptor_count needs a model II compartment");
  const double eps = ps.epsilon;
  const double nu = field.coefficients().nu;
  const double A = field.coefficients().A[j];
  return pi * eps * eps * c.ell * c.ell * (m2->Ibar / m2->gammabar) +
         2.0 * pi * nu * ps.D * A / (m2->gammabar / (eps * eps));
}

std::vector<Model3Root> solve_model3_2d(
    const ValidatedSpec& spec, const Kinetics& kin,
    const std::vector<Eigen::MatrixXd>& extra_seeds) {
  const auto& ps = spec.spec();
  if (dimension(ps.geometry) != 2)
    throw UnsupportedError("solve_model3_2d requires a planar geometry");
  const int n = spec.n_compartments();
  const int K = kin.K;
  const double nu = spec.nu();
  const double shift = source_shift(ps);

  // kappa = 0 compartments carry no flux: their strengths are identically
  // zero and they drop out of the matching system
  std::vector<int> act;
  for (int j = 0; j < n; ++j)
    if (ps.compartments[j].kappa > 0.0) act.push_back(j);
  const int m = static_cast<int>(act.size());

  // A = S c_eff, with c_eff_j = w_{j,0} - shift
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  if (m > 0) {
    Eigen::VectorXd Psi(m);
    std::vector<Point> centers;
    std::vector<double> ells;
    for (int a = 0; a < m; ++a) {
      const auto& c = ps.compartments[act[a]];
      Psi[a] = psi_model1(ps.D, c.kappa, c.ell);
      centers.push_back(c.center);
      ells.push_back(c.ell);
    }
    GreensFunction G =
        ps.gamma0 > 0.0 ? make_helmholtz_greens(ps.geometry, ps.D, ps.gamma0)
                        : make_laplace_greens(ps.geometry, ps.D);
    InteractionMatrix Gm = interaction_matrix(G, centers, ells);
    Eigen::MatrixXd M = Psi.asDiagonal();
    M += 2.0 * pi * ps.D * Gm.G;
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m) + nu * M;
    Eigen::MatrixXd Tinv = T.partialPivLu().inverse();
    Eigen::MatrixXd Ssub;
    if (ps.gamma0 > 0.0) {
      Ssub = -Tinv;
    } else {
      Eigen::VectorXd b1 = Tinv * Eigen::VectorXd::Ones(m);
      double denom = b1.sum();
      Ssub = (b1 * b1.transpose()) / denom - Tinv;  // uses symmetry of Tinv
    }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) S(act[a], act[b]) = Ssub(a, b);
  }

  auto strengths = [&](const Eigen::MatrixXd& w) -> Eigen::VectorXd {
    Eigen::VectorXd c_eff = w.col(0).array() - shift;
    return S * c_eff;
  };

  const double coupling = 2.0 * pi * ps.D * nu;
  auto residual = [&](const Eigen::MatrixXd& w) -> Eigen::VectorXd {
    Eigen::VectorXd A = strengths(w);
    Eigen::VectorXd F(n * K);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd fj = kin.f(w.row(j).transpose());
      fj[0] += coupling * A[j];
      F.segment(j * K, K) = fj;
    }
    return F;
  };

  auto jacobian = [&](const Eigen::MatrixXd& w) -> Eigen::MatrixXd {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n * K, n * K);
    for (int j = 0; j < n; ++j) {
      J.block(j * K, j * K, K, K) = kin.jacobian(w.row(j).transpose());
      for (int k = 0; k < n; ++k) J(j * K, k * K) += coupling * S(j, k);
    }
    return J;
  };

  // seeds: isolated kinetics root from each compartment's initial state,
  // replicated, plus user-supplied states
  std::vector<Eigen::MatrixXd> seeds = extra_seeds;
  {
    Eigen::MatrixXd w0(n, K);
    for (int j = 0; j < n; ++j) {
      const auto* m3 = std::get_if<ModelIII>(&ps.compartments[j].model);
      Eigen::VectorXd g = Eigen::VectorXd::Constant(K, 0.5);
      if (m3 && static_cast<int>(m3->w0.size()) == K)
        for (int a = 0; a < K; ++a) g[a] = m3->w0[a];
      Eigen::VectorXd iso = g;
      try {
        iso = isolated_fixed_point(kin, g);
      } catch (const Error&) {
        // keep the raw guess
      }
      w0.row(j) = iso.transpose();
    }
    seeds.push_back(w0);
  }

  std::vector<Model3Root> roots;
  std::vector<double> last_residuals;
  for (const auto& seed : seeds) {
    Eigen::MatrixXd w = seed;
    Eigen::VectorXd F = residual(w);
    double fn = F.norm();
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      if (fn <= 1e-12) {
        ok = true;
        break;
      }
      Eigen::MatrixXd J = jacobian(w);
      Eigen::VectorXd step = J.partialPivLu().solve(-F);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool accepted = false;
      while (lambda >= 1.0 / 1024.0) {
        Eigen::MatrixXd wt = w;
        for (int j = 0; j < n; ++j)
          wt.row(j) += lambda * step.segment(j * K, K).transpose();
        Eigen::VectorXd Ft = residual(wt);
        if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * lambda) * fn) {
          w = wt;
          F = Ft;
          fn = F.norm();
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    last_residuals.push_back(fn);
    if (ok || fn <= 1e-10) {
      bool duplicate = false;
      for (const auto& r : roots)
        if ((r.w - w).cwiseAbs().maxCoeff() < 1e-6) duplicate = true;
      if (!duplicate)
        roots.push_back({w, strengths(w), fn});
    }
  }
  if (roots.empty())
    throw ConvergenceError(
        "solve_model3_2d: no seed converged; inspect residual history",
        last_residuals);
  return roots;
}

VolumeTransmission2D volume_transmission_2d(const ValidatedSpec& spec,
                                            const Eigen::VectorXd& J,
                                            double alpha, double beta) {
  const auto& ps = spec.spec();
  if (!std::holds_alternative<Disk2D>(ps.geometry))
    throw UnsupportedError(
        "volume_transmission_2d requires the disk geometry (Helmholtz stage)");
  if (ps.gamma0 != 0.0)
    throw UnsupportedError("volume transmission uses a zero-degradation outer "
                           "stage; set gamma0 = 0");
  if (alpha < 0.0 || beta < 0.0)
    throw DomainError("switching rates must be >= 0");
  const double gamma = alpha + beta;
  if (!(gamma > 0.0)) throw DomainError("alpha + beta must be > 0");
  const int n = spec.n_compartments();
  if (J.size() != n) throw DomainError("flux vector J must have one entry per "
                                       "compartment");
  const double nu = spec.nu();
  const double D = ps.D;
  const double eps = ps.epsilon;

  std::vector<Point> centers;
  std::vector<double> ells;
  for (const auto& c : ps.compartments) {
    centers.push_back(c.center);
    ells.push_back(c.ell);
  }
  GreensFunction G0 = make_laplace_greens(ps.geometry, D);
  GreensFunction Gg = make_helmholtz_greens(ps.geometry, D, gamma);
  InteractionMatrix G0m = interaction_matrix(G0, centers, ells);
  InteractionMatrix Ggm = interaction_matrix(Gg, centers, ells);

  Eigen::MatrixXd T0 =
      Eigen::MatrixXd::Identity(n, n) + nu * 2.0 * pi * D * G0m.G;
  Eigen::MatrixXd Tg =
      Eigen::MatrixXd::Identity(n, n) + nu * 2.0 * pi * D * Ggm.G;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu0(T0);
  Eigen::MatrixXd B0 = lu0.inverse();
  Eigen::VectorXd b1 = B0 * Eigen::VectorXd::Ones(n);
  double denom = b1.sum();
  if (std::fabs(denom) < 1e-14)
    throw ConditioningError("volume transmission stage-1 system degenerate",
                            1.0 / std::fabs(denom));

  // P: phi -> stage-1 strengths; row vector u_inf(phi) = (b1 . phi)/denom
  Eigen::MatrixXd P = (b1 * b1.transpose()) / denom - B0;
  // K: regular cross-kernel 2 pi D nu (G_gamma - G_0) at the centres
  Eigen::MatrixXd Km(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double diff = (i == j)
                        ? Gg.regular_at(centers[i]) - G0.regular_at(centers[i])
                        : Gg.eval(centers[i], centers[j]).value -
                              G0.eval(centers[i], centers[j]).value;
      Km(i, j) = 2.0 * pi * D * nu * diff;
    }
  }
  // w_p(phi) = (beta/gamma) [u_inf(phi) 1 + K P phi] =: S phi
  Eigen::MatrixXd Sm =
      (beta / gamma) *
      (Eigen::VectorXd::Ones(n) * b1.transpose() / denom + Km * P);

  Eigen::VectorXd t(n);
  for (int j = 0; j < n; ++j) t[j] = eps * ells[j] * J[j] / (D * nu);

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - Sm;
  Eigen::PartialPivLU<Eigen::MatrixXd> lus(lhs);
  Eigen::VectorXd phi = lus.solve(-(Tg * t));
  double res = (lhs * phi + Tg * t).norm();
  if (!phi.allFinite() || res > 1e-10 * std::max(1.0, (Tg * t).norm()))
    throw ConditioningError("volume transmission composed system singular",
                            res);

  VolumeTransmission2D out;
  out.phi = phi;
  out.u_inf_stage1 = b1.dot(phi) / denom;
  out.a_stage1 = P * phi;
  out.a_stage2 = t;
  out.leading_u1 = (beta / gamma) * out.u_inf_stage1;

  const double uinf = out.u_inf_stage1;
  Eigen::VectorXd A1 = out.a_stage1;
  Eigen::VectorXd A2 = out.a_stage2;
  auto ubar = [=](const Point& x) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += A1[k] * G0.eval(x, centers[k]).value;
    return uinf - 2.0 * pi * D * nu * s;
  };
  auto wp = [=](const Point& x) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      double diff = Gg.eval(x, centers[k]).value - G0.eval(x, centers[k]).value;
      s += A1[k] * diff;
    }
    return (beta / gamma) * (uinf + 2.0 * pi * D * nu * s);
  };
  out.ubar = ubar;
  out.u1 = [=](const Point& x) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += A2[k] * Gg.eval(x, centers[k]).value;
    return wp(x) - 2.0 * pi * D * nu * s;
  };
  return out;
}

}  // namespace mdiff
