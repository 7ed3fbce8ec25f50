#pragma once
// Restarted GMRES with right preconditioning on complex vectors.

#include <Eigen/Dense>

#include <functional>

namespace folhe {

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct GmresResult {
  Eigen::VectorXcd x;
  double rel_residual = 1.0;
  int iterations = 0;
  bool converged = false;
};

// Solves A x = b to ||b - A x|| <= rtol ||b||; `precond` applies M^{-1}.
GmresResult gmres(const LinearMap& apply, const LinearMap& precond, const Eigen::VectorXcd& b, double rtol,
                  int restart = 60, int max_iter = 600);

}  // namespace folhe
