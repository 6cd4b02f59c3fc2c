#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "mdiff/geometry.hpp"
#include "mdiff/greens.hpp"
#include "mdiff/kinetics.hpp"

namespace mdiff {

/// Strength coefficients of a planar steady state. When gamma0 = 0 the
/// coefficients satisfy sum A_k = 0 and the far-field constant u_inf is set.
struct Coefficients2D {
  Eigen::VectorXd A;
  Eigen::VectorXd Psi;
  Eigen::VectorXd c0;  // unshifted interface constants
  std::optional<double> u_inf;
  double nu = 0.0;
  double solve_residual = 0.0;
};

/// Interface constants of a semipermeable (model II) compartment and its
/// interior profile V(rho) = Ibar/gammabar + Phibar I0(bb rho)/I0(bb ell).
struct Model2Constants2D {
  double c0 = 0.0;   // Ibar/gammabar
  double psi = 0.0;  // D/(kappa ell) + D/(Dbar F(bb ell))
  double beta_bar = 0.0;
  double ell = 0.0;
  double D = 0.0, Dbar = 0.0, kappa = 0.0, Ibar = 0.0, gammabar = 0.0;

  double phibar(double nuA) const;               // interior amplitude
  double interior_value(double rho, double nuA) const;
  double interior_flux(double rho, double nuA) const;  // Dbar dV/drho
};

Model2Constants2D model2_constants_2d(const CompartmentSpec& comp, double D);

/// Steady outer/inner field for models I and II (mixed allowed).
class SteadyField2D {
 public:
  SteadyField2D(ValidatedSpec spec, Coefficients2D coef, GreensFunction G,
                double shift);

  /// Outer field; advisory NearCompartmentError within 2 eps of a centre.
  double eval_outer(const Point& x) const;
  /// Inner field around compartment j at stretched radius rho >= ell_j.
  double eval_inner(int j, double rho) const;

  const Coefficients2D& coefficients() const { return coef_; }
  const ValidatedSpec& spec() const { return spec_; }
  const GreensFunction& greens() const { return G_; }
  double source_shift() const { return shift_; }

 private:
  ValidatedSpec spec_;
  Coefficients2D coef_;
  GreensFunction G_;
  double shift_;  // I0/gamma0, re-added on output
};

/// Solve the strength system for given interface constants. Models the
/// matrix equation (I + nu M) a = -c with M = diag(Psi) + 2 pi D G, and the
/// zero-degradation constrained variant.
Coefficients2D solve_strengths_2d(const ValidatedSpec& spec,
                                  const Eigen::VectorXd& c0,
                                  const Eigen::VectorXd& Psi,
                                  const InteractionMatrix& M);

/// Steady state for specs whose compartments are all model I or II.
SteadyField2D solve_model1_2d(const ValidatedSpec& spec);

/// Steady-state receptor count of a model II compartment.
double receptor_count(const SteadyField2D& field, int j);

struct Model3Root {
  Eigen::MatrixXd w;        // N x K compartment states
  Eigen::VectorXd A;        // strengths at the root
  double residual = 0.0;
};

/// Roots of the nonlinear interface system for model III compartments.
/// Seeds: isolated-kinetics fixed points plus any user-supplied states.
std::vector<Model3Root> solve_model3_2d(
    const ValidatedSpec& spec, const Kinetics& kin,
    const std::vector<Eigen::MatrixXd>& extra_seeds = {});

/// Two-stage steady state of the synchronously switching release problem.
struct VolumeTransmission2D {
  Eigen::VectorXd phi;        // Dirichlet boundary values (= u1 on each U_j)
  Eigen::VectorXd a_stage1;   // Laplace-stage strengths
  Eigen::VectorXd a_stage2;   // Helmholtz-stage strengths (flux targets)
  double u_inf_stage1 = 0.0;
  double leading_u1 = 0.0;    // position-independent leading term of u1
  std::function<double(const Point&)> ubar;  // u0 + u1
  std::function<double(const Point&)> u1;
};

VolumeTransmission2D volume_transmission_2d(const ValidatedSpec& spec,
                                            const Eigen::VectorXd& J,
                                            double alpha, double beta);

}  // namespace mdiff
