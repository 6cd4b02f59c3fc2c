#pragma once

#include <Eigen/Core>
#include <optional>
#include <variant>
#include <vector>

#include "mdiff/geometry.hpp"
#include "mdiff/greens.hpp"
#include "mdiff/kinetics.hpp"

namespace mdiff {

/// Compartment shapes supported by the electrostatic capacitance
/// substitution. The dipole vector of the far-field expansion is stored for
/// completeness; it first contributes beyond the retained orders and is not
/// used by the solvers.
struct ShapeSphere {
  double a = 1.0;
};
struct ShapeHemisphere {
  double a = 1.0;
};
struct ShapeProlateSpheroid {
  double a = 1.0, b = 1.0;  // semi-major, semi-minor
};
struct ShapeOblateSpheroid {
  double a = 1.0, b = 1.0;
};
struct ShapeSpec {
  std::variant<ShapeSphere, ShapeHemisphere, ShapeProlateSpheroid,
               ShapeOblateSpheroid>
      shape = ShapeSphere{};
  Eigen::Vector3d dipole = Eigen::Vector3d::Zero();  // stored, unused
};

/// Electrostatic capacitance of a compartment shape (units of length).
/// The oblate form follows the source expression cosh^-1(b/a), which is
/// real only for b >= a; b < a raises DomainError rather than silently
/// substituting the conventional inverse-cosine form.
double capacitance(const ShapeSpec& shape);

struct Coefficients3D {
  Eigen::VectorXd Lambda;  // kappa ell^2/(kappa ell + D), or capacitance
  Eigen::VectorXd chi;     // near-field interaction corrections
  Eigen::VectorXd c0;
  std::optional<double> u_inf;
  double epsilon = 0.0;
};

class SteadyField3D {
 public:
  SteadyField3D(ValidatedSpec spec, Coefficients3D coef, GreensFunction G,
                double shift);
  double eval_outer(const Point& x) const;
  double eval_inner(int j, double rho) const;
  const Coefficients3D& coefficients() const { return coef_; }
  const ValidatedSpec& spec() const { return spec_; }

 private:
  ValidatedSpec spec_;
  Coefficients3D coef_;
  GreensFunction G_;
  double shift_;
};

/// Two-term expansion for model I compartments in the ball. Non-spherical
/// shapes substitute their capacitance for ell_j and require a Dirichlet
/// interface (kappa = inf).
SteadyField3D solve_model1_3d(
    const ValidatedSpec& spec,
    const std::vector<std::optional<ShapeSpec>>& shapes = {});

/// Leading-order strength of a semipermeable compartment and its interior
/// profile V(rho) = Ibar/gammabar + B sinh(bb rho)/rho.
struct Model2Coefficient3D {
  double A = 0.0;   // far-field strength, U = A/rho
  double B = 0.0;   // interior amplitude
  double beta_bar = 0.0;
  double c0 = 0.0;  // Ibar/gammabar
  double ell = 0.0, D = 0.0, Dbar = 0.0, kappa = 0.0;
  double exterior_value(double rho) const;  // A/rho
  double interior_value(double rho) const;
  double interior_flux(double rho) const;   // Dbar dV/drho
  double exterior_flux(double rho) const;   // D dU/drho
};

Model2Coefficient3D model2_coefficient_3d(const CompartmentSpec& comp,
                                          double D);

struct Model3Root3 {
  Eigen::MatrixXd w;  // N x K states
  double residual = 0.0;
};

/// Roots of the decoupled leading-order interface system for model III.
std::vector<Model3Root3> solve_model3_3d(const ValidatedSpec& spec,
                                         const Kinetics& kin);

}  // namespace mdiff
