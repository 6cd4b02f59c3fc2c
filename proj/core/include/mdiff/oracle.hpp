#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdiff/geometry.hpp"

namespace mdiff {

/// Physical (unrescaled) single-compartment radial problem with the
/// compartment centred at the origin of a disk or ball of radius R.
/// kappa_phys is the physical reactivity (the rescaled kappa divided by
/// epsilon); infinity means a Dirichlet interface.
struct RadialProblem {
  int dim = 2;
  double R = 1.0;
  bool unbounded = false;  // exterior problem on [r_in, inf)
  double u_inf = 0.0;      // far-field value for the unbounded Laplace case
  double r_in = 0.05;
  double D = 1.0;
  double gamma0 = 0.0;
  double I0 = 0.0;
  double kappa_phys = std::numeric_limits<double>::infinity();
  // interface data: either a prescribed constant (model I) ...
  double c0 = 0.0;
  // ... or an interior diffusion problem (model II, physical rates)
  bool model2 = false;
  double Dbar = 1.0;
  double gammabar_phys = 1.0;
  double Ibar_phys = 0.0;
};

struct RadialSolution {
  std::function<double(double)> u;  // outer concentration, r in [r_in, R]
  std::function<double(double)> v;  // interior (model II), r in [0, r_in]
  double interface_residual = 0.0;  // worst defect of the interface relations
  double boundary_residual = 0.0;   // outer Neumann defect
};

RadialSolution radial_exact_disk(const RadialProblem& p);
RadialSolution radial_exact_sphere(const RadialProblem& p);

/// Embedded compartment for the grid oracle.
struct FdCompartment {
  Point center = Point::Zero();
  double radius = 0.1;  // physical radius
  double kappa = std::numeric_limits<double>::infinity();
  double c0 = 0.0;
};

/// Rectangle (or disk-embedding box) steady problem
///   D lap u - gamma0 u = -I0 - source(x)
/// with a reflecting outer boundary and Robin/Dirichlet compartments.
struct FdProblem {
  DomainGeometry geometry = Rect2D{1.0, 1.0};  // Rect2D or Disk2D
  double D = 1.0;
  double gamma0 = 0.0;
  double I0 = 0.0;
  std::function<double(const Point&)> source;  // optional
  std::vector<FdCompartment> compartments;
  bool zero_mean = false;  // gamma0 = 0 consistency mode (solution zero-mean)
};

struct GridField {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  double x0 = 0.0, y0 = 0.0;
  std::vector<double> u;        // node-major rows (iy * nx + ix)
  std::vector<std::uint8_t> mask;  // 1 = solved unknown
  double residual = 0.0;
  int iterations = 0;

  double value_at(const Point& p) const;  // bilinear on active nodes
};

GridField fd_solve_rect(const FdProblem& p, double h);

struct ProbeError {
  Point x = Point::Zero();
  double a = 0.0, b = 0.0;
  double abs_err = 0.0, rel_err = 0.0;
  bool skipped = false;
  std::string note;
};

struct ErrorReport {
  std::vector<ProbeError> probes;
  double max_abs = 0.0, max_rel = 0.0;
  double mean_abs = 0.0, mean_rel = 0.0;
  int used = 0, skipped = 0;
};

/// Pointwise comparison of two fields. Probes inside a compartment or its
/// epsilon-neighbourhood are skipped with a note when a spec is supplied.
ErrorReport compare(const std::function<double(const Point&)>& field_a,
                    const std::function<double(const Point&)>& field_b,
                    const std::vector<Point>& probes,
                    const ValidatedSpec* spec = nullptr);

/// Least-squares slope of log(error) against log(scale): the observed order.
double estimate_order(const std::vector<double>& scales,
                      const std::vector<double>& errors);

}  // namespace mdiff
