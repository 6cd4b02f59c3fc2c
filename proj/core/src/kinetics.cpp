#include "mdiff/kinetics.hpp"

#include <Eigen/Dense>

#include "mdiff/errors.hpp"

namespace mdiff {

Kinetics linear_kinetics(const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& b) {
  if (lambda.size() != b.size())
    throw DomainError("linear_kinetics: lambda and b sizes differ");
  Kinetics k;
  k.K = static_cast<int>(lambda.size());
  k.f = [lambda, b](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return -lambda.cwiseProduct(w) + b;
  };
  k.jacobian = [lambda](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd((-lambda).asDiagonal());
  };
  return k;
}

Kinetics selkov_kinetics(double a, double b) {
  Kinetics k;
  k.K = 2;
  k.f = [a, b](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    Eigen::VectorXd out(2);
    double r = a * w[1] + w[0] * w[0] * w[1];
    out[0] = -w[0] + r;
    out[1] = b - r;
    return out;
  };
  k.jacobian = [a](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    Eigen::MatrixXd J(2, 2);
    double dr0 = 2.0 * w[0] * w[1];
    double dr1 = a + w[0] * w[0];
    J(0, 0) = -1.0 + dr0;
    J(0, 1) = dr1;
    J(1, 0) = -dr0;
    J(1, 1) = -dr1;
    return J;
  };
  return k;
}

Kinetics make_kinetics(const std::string& name,
                       const std::vector<double>& params) {
  if (name == "selkov") {
    if (params.size() != 2)
      throw DomainError("selkov kinetics take parameters [a, b]");
    return selkov_kinetics(params[0], params[1]);
  }
  if (name == "linear") {
    if (params.empty() || params.size() % 2 != 0)
      throw DomainError(
          "linear kinetics take parameters [lambda_1..lambda_K, b_1..b_K]");
    int K = static_cast<int>(params.size() / 2);
    Eigen::VectorXd lambda(K), b(K);
    for (int i = 0; i < K; ++i) {
      lambda[i] = params[i];
      b[i] = params[K + i];
    }
    return linear_kinetics(lambda, b);
  }
  throw DomainError("unknown kinetics: " + name);
}

Eigen::VectorXd isolated_fixed_point(const Kinetics& kin,
                                     const Eigen::VectorXd& guess, double tol,
                                     int max_iter) {
  Eigen::VectorXd w = guess;
  Eigen::VectorXd F = kin.f(w);
  double fn = F.norm();
  std::vector<double> history{fn};
  for (int it = 0; it < max_iter; ++it) {
    if (fn <= tol) return w;
    Eigen::VectorXd step = kin.jacobian(w).partialPivLu().solve(-F);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1.0 / 1024.0) {
      Eigen::VectorXd wt = w + lambda * step;
      Eigen::VectorXd Ft = kin.f(wt);
      if (Ft.allFinite() && Ft.norm() < (1.0 - 1e-4 * lambda) * fn) {
        w = wt;
        F = Ft;
        fn = F.norm();
        history.push_back(fn);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (fn <= tol) return w;
  throw ConvergenceError("isolated_fixed_point did not converge", history);
}

}  // namespace mdiff
