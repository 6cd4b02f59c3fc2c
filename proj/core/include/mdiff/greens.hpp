#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "mdiff/geometry.hpp"

namespace mdiff {

/// One Green's function evaluation, split into the free-space singularity
/// (-ln|x-x'|/(2 pi D) in 2D, 1/(4 pi D |x-x'|) in 3D) and the regular
/// remainder. value = singular_part + regular_part exactly by construction.
struct GreensEval {
  double value = 0.0;
  double regular_part = 0.0;
  double singular_part = 0.0;
};

/// Generalized Neumann Green's function of the Laplacian on a disk:
/// D lap G = 1/|O| - delta, zero-mean, reflecting boundary.
class DiskLaplaceGreens {
 public:
  DiskLaplaceGreens(double radius, double D);
  GreensEval eval(const Point& x, const Point& xi) const;
  double regular_at(const Point& x) const;
  double diffusivity() const { return D_; }

 private:
  double a_, D_;
};

/// 1D projected kernel of the rectangle expansion:
/// H0(y,y') = L2/3 + (y^2 + y'^2)/(2 L2) - max(y, y').
double rect_H0(double y, double yp, double L2);

/// Rectangle [0,L1]x[0,L2] analogue, evaluated from the tau-power expansion.
class RectLaplaceGreens {
 public:
  /// tau_terms = 0 picks the smallest truncation with tail below 1e-14.
  RectLaplaceGreens(double L1, double L2, double D, int tau_terms = 0);
  GreensEval eval(const Point& x, const Point& xp) const;
  double regular_at(const Point& x) const;
  /// Bound on the change in value if the dropped tau^j levels were restored.
  double tail_bound() const;
  int tau_terms() const { return terms_; }

 private:
  double L1_, L2_, D_, tau_;
  int terms_;
};

/// Ball of radius R0; the additive constant enforcing the zero-mean condition
/// is computed by quadrature at construction and cached.
class SphereLaplaceGreens {
 public:
  SphereLaplaceGreens(double R0, double D);
  GreensEval eval(const Point& x, const Point& xi) const;
  double regular_at(const Point& x) const;
  double zero_mean_constant() const { return B_; }

 private:
  double R0_, D_, B_;
};

/// Neumann Green's function of the modified Helmholtz operator
/// (D lap - rate) G = -delta on a ball, via the spherical-harmonic series.
class SphereHelmholtzGreens {
 public:
  SphereHelmholtzGreens(double R0, double D, double rate, int n_max = 64);

  struct Result {
    GreensEval g;
    double tail;  // magnitude estimate of the dropped series tail
    int terms_used;
  };
  Result eval_with_tail(const Point& x, const Point& x0) const;
  GreensEval eval(const Point& x, const Point& x0) const {
    return eval_with_tail(x, x0).g;
  }
  double regular_at(const Point& x) const;

  /// Term-wise analytic derivative of the value with respect to the rate.
  double ds_value(const Point& x, const Point& x0) const;
  double ds_regular_at(const Point& x) const;

  double rate() const { return rate_; }

 private:
  double boundary_series(double r, double r0, double ct, double* dsum,
                         double* tail_out = nullptr,
                         int* terms_out = nullptr) const;
  double R0_, D_, rate_, lambda_;
  int n_max_;
};

/// Disk analogue (separation of variables; cosine-Bessel series correction to
/// the free-space kernel K0).
class DiskHelmholtzGreens {
 public:
  DiskHelmholtzGreens(double radius, double D, double rate, int n_max = 64);
  GreensEval eval(const Point& x, const Point& xi) const;
  double regular_at(const Point& x) const;
  double rate() const { return rate_; }

 private:
  double boundary_series(double r, double rp, double ct) const;
  double a_, D_, rate_, lambda_;
  int n_max_;
};

/// Type-erased handle used by the solvers.
struct GreensFunction {
  std::function<GreensEval(const Point&, const Point&)> eval;
  std::function<double(const Point&)> regular_at;
  double D = 1.0;
  int dim = 2;
};

GreensFunction make_laplace_greens(const DomainGeometry& g, double D);
GreensFunction make_helmholtz_greens(const DomainGeometry& g, double D,
                                     double rate, int n_max = 64);

/// N x N Green's interaction matrix. Off-diagonal entries are G(x_i, x_j);
/// diagonal entries are the regular part, shifted by -ln(ell_j)/(2 pi D) in
/// two dimensions.
struct InteractionMatrix {
  Eigen::MatrixXd G;
  int N = 0;
};

enum class GreensMode { Laplace, Helmholtz };

InteractionMatrix build_interaction_matrix(const ValidatedSpec& spec,
                                           GreensMode mode, double s = 0.0);

/// Lower-level builder used where the diffusivity differs from the spec's
/// (e.g. the reduced quorum-sensing model).
InteractionMatrix interaction_matrix(const GreensFunction& G,
                                     const std::vector<Point>& centers,
                                     const std::vector<double>& ells);

/// d/ds of the modified-Helmholtz Green's function at total rate gamma0 + s0,
/// by central differences with one Richardson level.
struct SDerivative {
  double value = 0.0;
  double error = 0.0;  // |refined - coarse| Richardson estimate
};
SDerivative helmholtz_s_derivative(const DomainGeometry& g, double D,
                                   double gamma0, const Point& x,
                                   const Point& xp, double s0, double h,
                                   int n_max = 64);

}  // namespace mdiff
