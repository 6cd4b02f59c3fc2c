#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "mdiff/geometry.hpp"

namespace mdiff {

/// Initial bulk profile with declared compact support (or a constant).
/// A nonzero support_inner declares an annular support shell.
struct InitialCondition {
  std::function<double(const Point&)> u0;
  Point support_center = Point::Zero();
  double support_radius = 0.0;  // ignored when is_constant
  double support_inner = 0.0;   // inner exclusion radius of the support
  bool is_constant = false;
  double constant_value = 0.0;
  int quad_order = 32;  // quadrature hint
};

InitialCondition constant_ic(double c);
/// amplitude * exp(-|x-c|^2 / (2 width^2)), truncated at support_radius
/// (default 5 widths).
InitialCondition gaussian_bump_ic(const Point& center, double width,
                                  double amplitude,
                                  double support_radius = 0.0);

/// T(x) = (1 + sqrt(gamma0/D) x) / (2 gamma0): half-line relaxation time.
double accumulation_time_1d(double x, double gamma0, double D);

/// The same quantity through the generic Laplace-space route: solve the
/// transformed two-point problem on [0, L], then T = (d/ds)[s u~]/u at s=0.
double accumulation_time_1d_laplace(double x, double gamma0, double D,
                                    double L);

/// Gamma_0(x, s) = int G(x, x'; s) u0(x') dx' by adaptive quadrature
/// (rate gamma0 + s).
double gamma0_projection(const InitialCondition& ic, const Point& x, double s,
                         const DomainGeometry& g, double D, double gamma0,
                         double rel_tol = 1e-6);

struct AccumulationResult {
  double T = 0.0;          // full expression at the retained order
  double T_leading = 0.0;  // divergent leading term alone
  double correction = 0.0; // numerator correction (A', H terms)
  double u_steady = 0.0;   // steady outer field at the probe
};

/// Planar accumulation time at an outer point (model I, gamma0 > 0, disk).
AccumulationResult accumulation_time_2d(const ValidatedSpec& spec,
                                        const InitialCondition& ic,
                                        const Point& x);

/// Ball analogue at the two-term order in epsilon.
AccumulationResult accumulation_time_3d(const ValidatedSpec& spec,
                                        const InitialCondition& ic,
                                        const Point& x);

}  // namespace mdiff
