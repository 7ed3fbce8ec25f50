#pragma once
// Flat torus T^d = R^d / Z^d with a constant linear foliation, transverse
// complex structure, transverse metric and leafwise volume, plus the finite
// set of basic Fourier modes used to represent basic fields.

#include "folhe/lattice.hpp"
#include "folhe/symbolic.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace folhe {

using cd = std::complex<double>;

struct ModelParams {
  int d = 3;
  int n = 1;
  int m = 1;
  std::vector<SymVec> xi;    // m rows of length d
  Eigen::MatrixXd theta;     // optional 2n x d transverse coframe (rows)
  Eigen::MatrixXd g;         // optional 2n x 2n metric on the dual frame
  Eigen::MatrixXd J;         // optional 2n x 2n complex structure on the dual frame
  Eigen::MatrixXd omega;     // optional; must equal g(J., .) when given
  double chi = 1.0;          // chi(xi_1, ..., xi_m)
  int cutoff = 8;
};

struct ModeSet {
  int cutoff = 0;
  int d_eff = 0;
  std::vector<IntVec> k;                 // admissible d-vectors
  std::vector<std::vector<int>> a;       // coordinates in the lattice basis
  std::vector<size_t> neg;               // index of -k
  size_t zero = 0;
  std::vector<Eigen::VectorXcd> k10;     // (1,0) components of the covector k
  std::vector<double> symbol;            // symbol of the P-operator
  std::vector<int> grid_dims;            // padded collocation grid per effective axis
  size_t grid_points = 1;
  std::vector<size_t> grid_slot;         // linear grid index of each mode
  std::map<IntVec, size_t> lookup;

  size_t size() const { return k.size(); }
  long find(const IntVec& kv) const {
    auto it = lookup.find(kv);
    return it == lookup.end() ? -1 : static_cast<long>(it->second);
  }
};

class Model {
 public:
  static std::shared_ptr<const Model> create(const ModelParams& params);
  // Product model T^{2n} x T^m with xi_j = e_{2n+j}, unit metric and chi = 1.
  static std::shared_ptr<const Model> product(int n, int m, int cutoff);

  int d() const { return p_.d; }
  int n() const { return p_.n; }
  int m() const { return p_.m; }
  int cutoff() const { return p_.cutoff; }
  const ModelParams& params() const { return p_; }

  bool is_admissible(const IntVec& k) const;
  const std::vector<IntVec>& lattice_basis() const { return basis_; }
  int d_eff() const { return static_cast<int>(basis_.size()); }
  bool full_transverse_lattice() const { return d_eff() == 2 * n(); }

  const Eigen::MatrixXd& theta() const { return theta_; }
  const Eigen::MatrixXd& g() const { return g_; }
  const Eigen::MatrixXd& J() const { return J_; }
  const Eigen::MatrixXd& omega() const { return omega_; }
  // Columns: g-orthonormal, J-adapted basis (v1, Jv1, v3, Jv3, ...) in the
  // frame dual to theta.
  const Eigen::MatrixXd& adapted_basis() const { return adapted_; }
  // theta^a = sum_j U(a,j) zeta^j + conj(U(a,j)) zetabar^j.
  const Eigen::MatrixXcd& theta_to_holo() const { return holo_; }

  // Coordinates of an admissible covector k in the theta coframe.
  Eigen::VectorXd theta_coords(const IntVec& k) const;
  // (1,0) part of sum_a kappa_a theta^a, in the zeta coframe.
  Eigen::VectorXcd holomorphic_part(const Eigen::VectorXd& kappa) const;

  double volume() const { return volume_; }
  double chi() const { return p_.chi; }
  const ModeSet& modes() const { return modes_; }
  std::string normalization() const;

 private:
  explicit Model(ModelParams p);
  void build_frames();
  void build_modes();

  ModelParams p_;
  std::vector<IntVec> basis_;
  Eigen::MatrixXd theta_, theta_pinv_, g_, J_, omega_, adapted_;
  Eigen::MatrixXcd holo_;
  double volume_ = 0.0;
  ModeSet modes_;
};

using ModelPtr = std::shared_ptr<const Model>;

}  // namespace folhe
