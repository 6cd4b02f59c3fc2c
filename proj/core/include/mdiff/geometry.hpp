#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdiff/errors.hpp"

namespace mdiff {

using Point = Eigen::Vector3d;  // z component is zero for planar domains

struct Disk2D {
  double radius = 1.0;
};
struct Rect2D {
  double L1 = 1.0;
  double L2 = 1.0;
};
struct Sphere3D {
  double R0 = 1.0;
};
using DomainGeometry = std::variant<Disk2D, Rect2D, Sphere3D>;

int dimension(const DomainGeometry& g);
double domain_volume(const DomainGeometry& g);  // area in 2D
/// Smallest dimension of the inscribing rectangle/box (diameter for disk and
/// sphere). Recorded as the nondimensionalization scale; inputs are assumed
/// to already be nondimensional.
double inscribing_length(const DomainGeometry& g);
/// Distance from an interior point to the outer boundary (negative outside).
double boundary_distance(const DomainGeometry& g, const Point& x);

/// Prescribed constant boundary field.
struct ModelI {
  double c0 = 0.0;
};
/// Semipermeable interface with interior diffusion; rates are the rescaled
/// (order-one) interior quantities.
struct ModelII {
  double Dbar = 1.0;
  double gammabar = 1.0;
  double Ibar = 0.0;
};
/// Well-mixed reaction compartment: K species, species 0 is exchanged with
/// the bulk. Kinetics are resolved by name through the pdeode registry.
struct ModelIII {
  int K = 1;
  std::vector<double> w0;
  std::string kinetics_name;
  std::vector<double> kinetics_params;
};
using BoundaryModel = std::variant<ModelI, ModelII, ModelIII>;

struct CompartmentSpec {
  Point center = Point::Zero();
  double ell = 1.0;    // scaled radius, in (0, 1]
  double kappa = std::numeric_limits<double>::infinity();  // inf = Dirichlet
  BoundaryModel model = ModelI{};
};

struct ProblemSpec {
  DomainGeometry geometry = Disk2D{};
  std::vector<CompartmentSpec> compartments;
  double D = 1.0;
  double gamma0 = 0.0;
  double I0 = 0.0;
  double epsilon = 0.05;
  std::optional<double> sep_min_override;
};

/// nu = -1/ln(epsilon), the slowly vanishing planar small parameter.
double nu_from_epsilon(double epsilon);

struct Violation {
  std::string code;
  std::string message;
  std::vector<int> compartments;  // offending indices, if any
};

class ValidatedSpec {
 public:
  ValidatedSpec(ProblemSpec spec, double nu, double L, double sep_min)
      : spec_(std::move(spec)), nu_(nu), L_(L), sep_min_(sep_min) {}

  const ProblemSpec& spec() const { return spec_; }
  double nu() const { return nu_; }
  double length_scale() const { return L_; }
  double sep_min() const { return sep_min_; }
  double epsilon() const { return spec_.epsilon; }
  int n_compartments() const { return static_cast<int>(spec_.compartments.size()); }

 private:
  ProblemSpec spec_;
  double nu_;
  double L_;
  double sep_min_;
};

struct ValidationOutcome {
  std::optional<ValidatedSpec> spec;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  bool ok() const { return spec.has_value(); }
};

ValidationOutcome validate(const ProblemSpec& spec);
/// Idempotent: a ValidatedSpec revalidates to itself.
ValidationOutcome validate(const ValidatedSpec& spec);

/// Throwing convenience used by solvers and the CLI.
ValidatedSpec validate_or_throw(const ProblemSpec& spec);

struct ValidationError : Error {
  ValidationError(const std::string& what, std::vector<Violation> v)
      : Error(what), violations(std::move(v)) {}
  std::vector<Violation> violations;
};

}  // namespace mdiff
