#include "mdiff/pdeode.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "mdiff/greens.hpp"

namespace mdiff {

namespace {
constexpr double pi = std::numbers::pi;

InteractionMatrix laplace_matrix_at_D0(const ValidatedSpec& spec, double D0) {
  const auto& ps = spec.spec();
  std::vector<Point> centers;
  std::vector<double> ells;
  for (const auto& c : ps.compartments) {
    centers.push_back(c.center);
    ells.push_back(c.ell);
  }
  GreensFunction G0 = make_laplace_greens(ps.geometry, D0);
  return interaction_matrix(G0, centers, ells);
}

}  // namespace

CouplingMatrixW coupling_matrix(const ValidatedSpec& spec, double D0) {
  const auto& ps = spec.spec();
  if (dimension(ps.geometry) != 2)
    throw UnsupportedError("coupling_matrix: the reduced model is planar");
  if (!(D0 > 0.0)) throw DomainError("coupling_matrix requires D0 > 0");
  const int n = spec.n_compartments();
  if (n == 0) throw UnsupportedError("spec has no compartments");
  const double kappa = ps.compartments[0].kappa;
  const double ell = ps.compartments[0].ell;
  for (const auto& c : ps.compartments)
    if (c.kappa != kappa || c.ell != ell)
      throw UnsupportedError(
          "the W form requires identical compartments; heterogeneous specs "
          "take the general strength solve");
  if (std::isinf(kappa))
    throw UnsupportedError("the reduced model assumes finite kappa");

  CouplingMatrixW out;
  out.nu = spec.nu();
  out.D0 = D0;
  out.kappa = kappa;
  out.ell = ell;
  InteractionMatrix G0 = laplace_matrix_at_D0(spec, D0);
  out.Q = 2.0 * pi * (kappa * ell * D0 / (kappa * ell + D0)) * G0.G;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n) + out.nu * out.Q;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
  out.W = lu.inverse();
  out.solve_residual = (T * out.W - Eigen::MatrixXd::Identity(n, n)).norm();
  if (!out.W.allFinite() || out.solve_residual > 1e-10)
    throw ConditioningError("coupling matrix (I + nu Q) is near singular",
                            out.solve_residual);
  return out;
}

ReducedModel::ReducedModel(const ValidatedSpec& spec, double D0, Kinetics kin)
    : N_(spec.n_compartments()), D0_(D0), gamma0_(spec.spec().gamma0),
      kin_(std::move(kin)) {
  const auto& ps = spec.spec();
  if (dimension(ps.geometry) != 2)
    throw UnsupportedError("ReducedModel: the reduced dynamics are planar");
  if (!(D0 > 0.0)) throw DomainError("ReducedModel requires D0 > 0");
  vol_ = domain_volume(ps.geometry);
  const double eps = ps.epsilon;
  Uj_.resize(N_);
  for (int j = 0; j < N_; ++j) {
    double r = eps * ps.compartments[j].ell;
    Uj_[j] = pi * r * r;
  }

  // strengths: [diag(1 + D0/(kappa ell)) + 2 pi D0 nu G0] A = ubar - w_0;
  // kappa = 0 decouples a compartment (A_j = 0), handled by masking
  InteractionMatrix G0 = laplace_matrix_at_D0(spec, D0);
  const double nu = spec.nu();
  std::vector<int> act;
  for (int j = 0; j < N_; ++j)
    if (ps.compartments[j].kappa > 0.0) act.push_back(j);
  C_ = Eigen::MatrixXd::Zero(N_, N_);
  if (!act.empty()) {
    const int m = static_cast<int>(act.size());
    Eigen::MatrixXd T(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b)
        T(a, b) = 2.0 * pi * D0 * nu * G0.G(act[a], act[b]);
      const auto& c = ps.compartments[act[a]];
      double diag = std::isinf(c.kappa) ? 1.0 : 1.0 + D0 / (c.kappa * c.ell);
      T(a, a) += diag;
    }
    Eigen::MatrixXd Tinv = T.partialPivLu().inverse();
    if (!Tinv.allFinite())
      throw ConditioningError("reduced strength system singular", 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) C_(act[a], act[b]) = Tinv(a, b);
  }
}

Eigen::VectorXd ReducedModel::strengths(const Eigen::VectorXd& y) const {
  const int K = kin_.K;
  Eigen::VectorXd rhs(N_);
  for (int j = 0; j < N_; ++j) rhs[j] = y[0] - y[1 + j * K];
  return C_ * rhs;
}

Eigen::VectorXd ReducedModel::rhs(const Eigen::VectorXd& y) const {
  const int K = kin_.K;
  Eigen::VectorXd A = strengths(y);
  Eigen::VectorXd dy(y.size());
  dy[0] = -gamma0_ * y[0] - 2.0 * pi * D0_ / vol_ * A.sum();
  for (int j = 0; j < N_; ++j) {
    Eigen::VectorXd w = y.segment(1 + j * K, K);
    Eigen::VectorXd f = kin_.f(w);
    f[0] += 2.0 * pi * D0_ * A[j];
    dy.segment(1 + j * K, K) = f / Uj_[j];
  }
  return dy;
}

Eigen::MatrixXd ReducedModel::jacobian(const Eigen::VectorXd& y) const {
  const int K = kin_.K;
  const int n = state_size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  // dA_j/dubar = (C 1)_j ; dA_j/dw_{k,0} = -C_{jk}
  Eigen::VectorXd C1 = C_ * Eigen::VectorXd::Ones(N_);
  J(0, 0) = -gamma0_ - 2.0 * pi * D0_ / vol_ * C1.sum();
  for (int k = 0; k < N_; ++k) {
    double colsum = C_.col(k).sum();
    J(0, 1 + k * K) = 2.0 * pi * D0_ / vol_ * colsum;
  }
  for (int j = 0; j < N_; ++j) {
    Eigen::VectorXd w = y.segment(1 + j * K, K);
    J.block(1 + j * K, 1 + j * K, K, K) = kin_.jacobian(w) / Uj_[j];
    J(1 + j * K, 0) += 2.0 * pi * D0_ * C1[j] / Uj_[j];
    for (int k = 0; k < N_; ++k)
      J(1 + j * K, 1 + k * K) += -2.0 * pi * D0_ * C_(j, k) / Uj_[j];
  }
  return J;
}

ReducedTrajectory integrate_reduced(const ReducedModel& model,
                                    const Eigen::VectorXd& y0, double t_end,
                                    double dt_sample, const OdeOptions& opt) {
  if (y0.size() != model.state_size())
    throw DomainError("integrate_reduced: state size mismatch");
  ReducedTrajectory traj;
  Eigen::VectorXd y = y0;
  double next_sample = 0.0;
  auto rhs = [&](double, const Eigen::VectorXd& v) { return model.rhs(v); };
  traj.stats = integrate_dp45(rhs, y, 0.0, t_end, opt,
                              [&](double t, const Eigen::VectorXd& v) {
                                if (t + 1e-15 >= next_sample) {
                                  traj.t.push_back(t);
                                  traj.y.push_back(v);
                                  next_sample += dt_sample;
                                }
                                return true;
                              });
  if (traj.stats.rejected > 50 + 5 * traj.stats.accepted)
    traj.advisory =
        "step rejection dominated the run; the reduced system looks stiff "
        "(consider weaker coupling or an implicit integrator)";
  return traj;
}

Eigen::VectorXd reduced_fixed_point(const ReducedModel& model,
                                    const Eigen::VectorXd& guess, double tol,
                                    int max_iter) {
  Eigen::VectorXd y = guess;
  Eigen::VectorXd F = model.rhs(y);
  double fn = F.norm();
  std::vector<double> history{fn};
  for (int it = 0; it < max_iter; ++it) {
    if (fn <= tol) return y;
    Eigen::VectorXd step = model.jacobian(y).partialPivLu().solve(-F);
    if (!step.allFinite()) break;
    double lam = 1.0;
    bool accepted = false;
    while (lam >= 1.0 / 4096.0) {
      Eigen::VectorXd yt = y + lam * step;
      Eigen::VectorXd Ft = model.rhs(yt);
      if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * lam) * fn) {
        y = yt;
        F = Ft;
        fn = F.norm();
        history.push_back(fn);
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted) break;
  }
  if (fn <= tol) return y;
  throw ConvergenceError("reduced_fixed_point did not converge", history);
}

StabilityResult linear_stability(const ReducedModel& model,
                                 const Eigen::VectorXd& fixed_point,
                                 double re_tol, double im_tol) {
  double res = model.rhs(fixed_point).norm();
  if (res > 1e-8)
    throw DomainError(
        "linear_stability: the supplied state is not a fixed point "
        "(residual " + std::to_string(res) + ")");
  Eigen::MatrixXd J = model.jacobian(fixed_point);
  Eigen::EigenSolver<Eigen::MatrixXd> es(J);
  StabilityResult out;
  out.eigenvalues = es.eigenvalues();
  out.max_re = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < out.eigenvalues.size(); ++i) {
    auto ev = out.eigenvalues[i];
    if (std::fabs(ev.imag()) > im_tol) {
      out.max_re = std::max(out.max_re, ev.real());
      if (std::fabs(ev.real()) <= re_tol) out.hopf_flag = true;
    }
  }
  return out;
}

void kuramoto_rhs(const OscState& state, const KuramotoParams& p,
                  const Eigen::MatrixXd* W, Eigen::VectorXd& dtheta,
                  std::complex<double>& dz) {
  const int n = static_cast<int>(state.theta.size());
  if (p.omega.size() != n)
    throw DomainError("kuramoto_rhs: omega size mismatch");
  const double a = std::abs(state.z);
  const double psi = std::arg(state.z);
  dtheta.resize(n);
  std::complex<double> zsum(0.0, 0.0);
  if (W) {
    if (W->rows() != n || W->cols() != n)
      throw DomainError("kuramoto_rhs: W size mismatch");
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      std::complex<double> row(0.0, 0.0);
      for (int k = 0; k < n; ++k) {
        double w = (*W)(j, k);
        s += w * std::sin(psi - state.theta[k]);
        row += w * (std::exp(std::complex<double>(0.0, state.theta[k])) -
                    state.z);
      }
      dtheta[j] = p.omega[j] + p.kappa_hat * a * s;
      zsum += row;
    }
  } else {
    for (int j = 0; j < n; ++j) {
      dtheta[j] =
          p.omega[j] + p.kappa_hat * a * std::sin(psi - state.theta[j]);
      zsum += std::exp(std::complex<double>(0.0, state.theta[j])) - state.z;
    }
  }
  dz = p.alpha * p.kappa_hat / static_cast<double>(n) * zsum -
       std::complex<double>(p.gamma0, p.omega0) * state.z;
}

std::complex<double> order_parameter(const Eigen::VectorXd& theta) {
  if (theta.size() < 1) throw DomainError("order_parameter: empty state");
  std::complex<double> s(0.0, 0.0);
  for (int j = 0; j < theta.size(); ++j)
    s += std::exp(std::complex<double>(0.0, theta[j]));
  return s / static_cast<double>(theta.size());
}

Eigen::VectorXd frequency_quantiles(const std::string& dist, double scale,
                                    int N) {
  if (N < 1) throw DomainError("frequency_quantiles: N must be >= 1");
  Eigen::VectorXd w(N);
  for (int j = 0; j < N; ++j) {
    double p = (j + 0.5) / N;
    if (dist == "uniform") {
      w[j] = scale * (2.0 * p - 1.0);
    } else if (dist == "lorentzian") {
      w[j] = scale * std::tan(pi * (p - 0.5));
    } else if (dist == "gaussian") {
      // Acklam's rational approximation refined by one Halley step
      auto inv_norm = [](double q) {
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425, phigh = 1.0 - plow;
        double x;
        if (q < plow) {
          double u = std::sqrt(-2.0 * std::log(q));
          x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
               c[5]) /
              ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
        } else if (q <= phigh) {
          double u = q - 0.5, r = u * u;
          x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
               a[5]) *
              u /
              (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
               1.0);
        } else {
          double u = std::sqrt(-2.0 * std::log(1.0 - q));
          x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
                c[5]) /
              ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
        }
        double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - q;
        double g = std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
        return x - e / (g + 0.5 * x * e);
      };
      w[j] = scale * inv_norm(p);
    } else {
      throw DomainError("frequency_quantiles: unknown density " + dist);
    }
  }
  return w;
}

KuramotoTrajectory integrate_kuramoto(const OscState& init,
                                      const KuramotoParams& p,
                                      const Eigen::MatrixXd* W, double t_end,
                                      double dt_sample, const OdeOptions& opt) {
  const int n = static_cast<int>(init.theta.size());
  Eigen::VectorXd y(n + 2);
  y.head(n) = init.theta;
  y[n] = init.z.real();
  y[n + 1] = init.z.imag();

  Eigen::VectorXd dtheta(n);
  auto rhs = [&](double, const Eigen::VectorXd& v) {
    OscState s;
    s.theta = v.head(n);
    s.z = {v[n], v[n + 1]};
    std::complex<double> dz;
    kuramoto_rhs(s, p, W, dtheta, dz);
    Eigen::VectorXd dv(n + 2);
    dv.head(n) = dtheta;
    dv[n] = dz.real();
    dv[n + 1] = dz.imag();
    return dv;
  };

  KuramotoTrajectory traj;
  double next_sample = 0.0;
  integrate_dp45(rhs, y, 0.0, t_end, opt,
                 [&](double t, const Eigen::VectorXd& v) {
                   if (t + 1e-15 >= next_sample) {
                     Eigen::VectorXd th = v.head(n);
                     for (int j = 0; j < n; ++j) {
                       th[j] = std::fmod(th[j], 2.0 * pi);
                       if (th[j] < 0.0) th[j] += 2.0 * pi;
                     }
                     traj.t.push_back(t);
                     traj.theta.push_back(th);
                     traj.z.emplace_back(v[n], v[n + 1]);
                     traj.abs_z.push_back(std::abs(traj.z.back()));
                     traj.abs_zbar.push_back(std::abs(order_parameter(th)));
                     next_sample += dt_sample;
                   }
                   return true;
                 });
  return traj;
}

}  // namespace mdiff
