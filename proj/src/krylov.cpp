#include "folhe/krylov.hpp"

#include <cmath>
#include <vector>

namespace folhe {

GmresResult gmres(const LinearMap& apply, const LinearMap& precond, const Eigen::VectorXcd& b, double rtol,
                  int restart, int max_iter) {
  using cd = std::complex<double>;
  GmresResult res;
  res.x = Eigen::VectorXcd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.rel_residual = 0.0;
    res.converged = true;
    return res;
  }
  Eigen::VectorXcd r = b;
  while (res.iterations < max_iter) {
    const double beta = r.norm();
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= rtol) {
      res.converged = true;
      return res;
    }
    const int m = restart;
    std::vector<Eigen::VectorXcd> V;
    V.reserve(m + 1);
    V.push_back(r / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<cd> cs(m), sn(m);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < max_iter; ++j) {
      ++res.iterations;
      Eigen::VectorXcd w = apply(precond(V[j]));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          cd h = V[i].dot(w);
          H(i, j) += h;
          w -= h * V[i];
        }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        cd t = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double a = std::abs(H(j, j)), bb = std::abs(H(j + 1, j));
      const double den = std::hypot(a, bb);
      if (den == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = H(j, j) / den;
        sn[j] = H(j + 1, j) / den;
      }
      H(j, j) = den;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn[j] * g(j);
      g(j) = std::conj(cs[j]) * g(j);
      const double est = std::abs(g(j + 1)) / bnorm;
      if (H(j, j) != cd(0.0) && std::abs(H(j + 1, j)) == 0.0 && est > rtol && w.norm() == 0.0) {
        ++j;
        break;
      }
      if (est <= rtol) {
        ++j;
        break;
      }
      V.push_back(w / std::abs(w.norm()));
    }
    Eigen::VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(b.size());
    for (int i = 0; i < j; ++i) z += y(i) * V[i];
    res.x += precond(z);
    r = b - apply(res.x);
  }
  res.rel_residual = r.norm() / bnorm;
  res.converged = res.rel_residual <= rtol;
  return res;
}

}  // namespace folhe
