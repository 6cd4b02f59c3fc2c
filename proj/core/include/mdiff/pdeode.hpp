#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

#include "mdiff/geometry.hpp"
#include "mdiff/kinetics.hpp"
#include "mdiff/ode.hpp"

namespace mdiff {

/// Well-mixed coupling matrix of the reduced model for identical cells:
/// W = (I + nu Q)^{-1} with Q = 2 pi (kappa ell D0/(kappa ell + D0)) G0 and
/// G0 the Laplace interaction matrix at diffusivity D0.
struct CouplingMatrixW {
  Eigen::MatrixXd W;
  Eigen::MatrixXd Q;
  double nu = 0.0, D0 = 0.0, kappa = 0.0, ell = 0.0;
  double solve_residual = 0.0;
};

CouplingMatrixW coupling_matrix(const ValidatedSpec& spec, double D0);

/// Precomputed reduced dynamics
///   d ubar/dt = -gamma0 ubar - (2 pi D0/|O|) sum_j A_j
///   |U_j| dw_{j,a}/dt = f_a(w_j) + 2 pi D0 A_j delta_{a,0}
/// with the strengths solving
///   [1 + D0/(kappa_j ell_j)] A_j + 2 pi D0 nu sum_k G0_{jk} A_k
///     = ubar - w_{j,0}.
/// State layout: y[0] = ubar, y[1 + j K + a] = w_{j,a}.
class ReducedModel {
 public:
  ReducedModel(const ValidatedSpec& spec, double D0, Kinetics kin);

  Eigen::VectorXd rhs(const Eigen::VectorXd& y) const;
  /// Strengths A(y) for diagnostics and tests.
  Eigen::VectorXd strengths(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const;

  int N() const { return N_; }
  int K() const { return kin_.K; }
  int state_size() const { return 1 + N_ * kin_.K; }
  double D0() const { return D0_; }
  const Eigen::VectorXd& compartment_volumes() const { return Uj_; }
  const Eigen::MatrixXd& strength_matrix() const { return C_; }
  const Kinetics& kinetics() const { return kin_; }
  double gamma0() const { return gamma0_; }
  double domain_vol() const { return vol_; }

 private:
  int N_;
  double D0_, gamma0_, vol_;
  Kinetics kin_;
  Eigen::VectorXd Uj_;
  Eigen::MatrixXd C_;  // A = C (ubar 1 - w_col0)
};

struct ReducedTrajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> y;
  OdeStats stats;
  std::string advisory;  // set when step rejection dominates (stiffness)
};

ReducedTrajectory integrate_reduced(const ReducedModel& model,
                                    const Eigen::VectorXd& y0, double t_end,
                                    double dt_sample,
                                    const OdeOptions& opt = {});

/// Damped Newton on the reduced right-hand side.
Eigen::VectorXd reduced_fixed_point(const ReducedModel& model,
                                    const Eigen::VectorXd& guess,
                                    double tol = 1e-11, int max_iter = 400);

struct StabilityResult {
  Eigen::VectorXcd eigenvalues;
  bool hopf_flag = false;  // complex pair with |Re| <= re_tol, |Im| > im_tol
  double max_re = 0.0;     // most unstable real part over oscillatory modes
};

StabilityResult linear_stability(const ReducedModel& model,
                                 const Eigen::VectorXd& fixed_point,
                                 double re_tol = 1e-4, double im_tol = 1e-8);

// ---- Kuramoto-type environmental coupling ----------------------------------

struct OscState {
  Eigen::VectorXd theta;
  std::complex<double> z;
};

struct KuramotoParams {
  double kappa_hat = 1.0;
  double alpha = 1.0;
  double gamma0 = 0.0;
  double omega0 = 0.0;
  Eigen::VectorXd omega;  // natural frequencies
};

/// dtheta_j = omega_j + kappa_hat |z| sum_k W_jk sin(arg z - theta_k)
/// dz = (alpha kappa_hat / N) sum_jk W_jk (e^{i theta_k} - z)
///      - (gamma0 + i omega0) z.
/// W = nullptr means the identity (the directly coupled variant).
void kuramoto_rhs(const OscState& state, const KuramotoParams& p,
                  const Eigen::MatrixXd* W, Eigen::VectorXd& dtheta,
                  std::complex<double>& dz);

/// Mean of e^{i theta_j}; modulus in [0, 1].
std::complex<double> order_parameter(const Eigen::VectorXd& theta);

/// Deterministic quantile sample of an even frequency density:
/// "uniform" (on [-scale, scale]), "lorentzian", or "gaussian".
Eigen::VectorXd frequency_quantiles(const std::string& dist, double scale,
                                    int N);

struct KuramotoTrajectory {
  std::vector<double> t;
  std::vector<double> abs_zbar;
  std::vector<double> abs_z;
  std::vector<Eigen::VectorXd> theta;
  std::vector<std::complex<double>> z;
};

KuramotoTrajectory integrate_kuramoto(const OscState& init,
                                      const KuramotoParams& p,
                                      const Eigen::MatrixXd* W, double t_end,
                                      double dt_sample,
                                      const OdeOptions& opt = {});

}  // namespace mdiff
