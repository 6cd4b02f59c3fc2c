#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace mdiff {

/// Reaction kinetics of a well-mixed compartment, in the volume-scaled
/// ("hat") form that appears in the steady-state and reduced equations.
/// Species 0 is the one exchanged with the bulk.
struct Kinetics {
  int K = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

/// Registry lookup: "linear" (params: lambda_1..lambda_K, b_1..b_K) or
/// "selkov" (params: a, b).
Kinetics make_kinetics(const std::string& name,
                       const std::vector<double>& params);

/// f = (-lambda_a w_a + b_a); diagonal linear kinetics.
Kinetics linear_kinetics(const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& b);

/// Two-species Sel'kov oscillator with species 0 exchanged:
///   f0 = -w0 + a w1 + w0^2 w1
///   f1 =  b - a w1 - w0^2 w1
/// The isolated cell has the fixed point (b, b/(a+b^2)); it crosses a Hopf
/// point where (a+b^2)^2 - b^2 + ... changes sign, so tune b near that
/// threshold for near-oscillatory cells.
Kinetics selkov_kinetics(double a, double b);

/// Fixed point of the isolated kinetics by damped Newton from `guess`.
Eigen::VectorXd isolated_fixed_point(const Kinetics& kin,
                                     const Eigen::VectorXd& guess,
                                     double tol = 1e-13, int max_iter = 200);

}  // namespace mdiff
