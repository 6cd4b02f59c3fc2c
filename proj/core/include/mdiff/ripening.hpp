#pragma once

#include <Eigen/Core>
#include <vector>

#include "mdiff/geometry.hpp"

namespace mdiff {

struct RipeningParams {
  double D = 1.0;
  double nu = 0.0;      // enters the planar law only
  double phi_a = 0.1;   // dilute-phase volume fraction
  double phi_b = 1.0;   // dense-phase volume fraction
  double ell_c = 0.1;   // capillary length (3D law)
};

struct DropletState {
  Eigen::VectorXd ell;
  double tau = 0.0;
  std::vector<char> active;  // empty = all active
};

/// d ell_j / dtau = (D nu phi_a / (ell_j phi_b)) (1/ell_harm - 1/ell_j),
/// harmonic mean over the active droplets. Conserves sum ell^2 exactly.
Eigen::VectorXd rhs_2d(const Eigen::VectorXd& ell, const RipeningParams& p,
                       const std::vector<char>& active = {});

/// d ell_j / dt = (D phi_a ell_c / (phi_b ell_j)) (1/ell_av - 1/ell_j),
/// arithmetic mean. Conserves sum ell^3 exactly.
Eigen::VectorXd rhs_3d(const Eigen::VectorXd& ell, const RipeningParams& p,
                       const std::vector<char>& active = {});

struct RetirementEvent {
  int index = -1;
  double tau = 0.0;
};

struct RipeningTrajectory {
  std::vector<double> tau;
  std::vector<Eigen::VectorXd> ell;  // retired entries frozen at extinction
  std::vector<int> active_count;
  std::vector<RetirementEvent> events;
  /// max |Q(t) - Q(0)| with Q = sum ell^d over active plus frozen retired
  double conservation_drift = 0.0;
  int final_active = 0;
};

/// Adaptive integration of the coarsening flow. A droplet is retired when
/// its radius falls below extinction_threshold; the event time is bracketed
/// to event_tol. rtol controls the embedded error estimate.
RipeningTrajectory evolve(const DropletState& state, const RipeningParams& p,
                          int dim, double t_end, double rtol = 1e-10,
                          double extinction_threshold = 1e-4,
                          double event_tol = 1e-8);

/// Self-consistent cluster radii: Dirichlet u = 0 compartments fed by a bulk
/// source, radii fixed by the flux balance
///   2 pi D nu A_j = gamma0 u0 |U_j|  with |U_j| = pi (eps ell_j)^2.
struct ClusterFixedPoint {
  Eigen::VectorXd ell;
  Eigen::VectorXd A;
  Eigen::VectorXd residual;  // flux-balance defect per cluster
  int iterations = 0;
};
ClusterFixedPoint cluster_fixed_point(const ValidatedSpec& spec,
                                      double u0_interior);

}  // namespace mdiff
