#pragma once
// Basic End(E)-valued (p,q)-forms stored as Fourier coefficients over the
// admissible mode set, plus their values on the padded collocation grid.

#include "folhe/forms.hpp"
#include "folhe/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace folhe {

using RowMatrixXcd = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrixXcd>;
using ConstMatMap = Eigen::Map<const RowMatrixXcd>;

class BasicField {
 public:
  BasicField() = default;
  BasicField(ModelPtr model, int p, int q, int rank);

  static BasicField identity(ModelPtr model, int rank);
  static BasicField constant(ModelPtr model, const Eigen::MatrixXcd& value);
  static BasicField from_const_form(ModelPtr model, const forms::ConstForm& f, int rank = 1);
  // Scalar exponential e^{2 pi i k.x} times c; k must be an admissible mode.
  static BasicField scalar_mode(ModelPtr model, const IntVec& k, cd c);

  const ModelPtr& model() const { return model_; }
  int p() const { return p_; }
  int q() const { return q_; }
  int rank() const { return r_; }
  int ncomp() const { return ncomp_; }
  size_t nmodes() const { return model_->modes().size(); }
  bool hermitian_flag() const { return hermitian_; }
  void set_hermitian_flag(bool h) { hermitian_ = h; }
  bool empty() const { return !model_; }

  size_t index(size_t mode, int comp, int i, int j) const {
    return ((mode * ncomp_ + comp) * r_ + i) * r_ + j;
  }
  cd& at(size_t mode, int comp, int i, int j) { return data_[index(mode, comp, i, j)]; }
  cd at(size_t mode, int comp, int i, int j) const { return data_[index(mode, comp, i, j)]; }
  MatMap block(size_t mode, int comp) { return MatMap(&data_[index(mode, comp, 0, 0)], r_, r_); }
  ConstMatMap block(size_t mode, int comp) const { return ConstMatMap(&data_[index(mode, comp, 0, 0)], r_, r_); }
  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }

  BasicField& operator+=(const BasicField& o);
  BasicField& operator-=(const BasicField& o);
  BasicField& operator*=(cd s);
  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(BasicField a, cd s) { return a *= s; }
  friend BasicField operator*(cd s, BasicField a) { return a *= s; }

  // Pointwise conjugate transpose, including conjugation of the form part.
  BasicField adjoint() const;
  BasicField trace() const;
  // Entry (i,j) as a scalar field.
  BasicField entry(int i, int j) const;
  // Left/right multiplication by a constant matrix.
  BasicField left_mul(const Eigen::MatrixXcd& m) const;
  BasicField right_mul(const Eigen::MatrixXcd& m) const;
  // Zero every entry (i,j) with mask(i,j) == false.
  void apply_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask);

  double max_coeff() const;
  double l2_norm() const;
  // L2 inner product <a, b> = int tr(a b^*) (pointwise form inner product) dvol.
  cd inner(const BasicField& o) const;
  Eigen::MatrixXcd zero_mode(int comp = 0) const;
  // Max coefficient of a - a^* for (p,p)-forms.
  double hermitian_residual() const;
  void hermitize();

  void check_same_shape(const BasicField& o) const;

 private:
  ModelPtr model_;
  int p_ = 0, q_ = 0, r_ = 0, ncomp_ = 0;
  bool hermitian_ = false;
  std::vector<cd> data_;
};

// Values on the padded collocation grid.
struct GridField {
  int p = 0, q = 0, r = 0, ncomp = 0;
  size_t points = 0;
  std::vector<cd> v;  // [point][comp][i][j]

  GridField() = default;
  size_t stride() const { return static_cast<size_t>(ncomp) * r * r; }
  MatMap mat(size_t pt, int comp) { return MatMap(&v[pt * stride() + static_cast<size_t>(comp) * r * r], r, r); }
  ConstMatMap mat(size_t pt, int comp) const {
    return ConstMatMap(&v[pt * stride() + static_cast<size_t>(comp) * r * r], r, r);
  }
};

GridField to_grid(const BasicField& a);
BasicField from_grid(const GridField& g, const ModelPtr& model);

// Pointwise wedge product on the grid (matrix product of the coefficients).
GridField grid_wedge(int n, const GridField& a, const GridField& b);
GridField grid_sum(const GridField& a, const GridField& b, cd sb = 1.0);
// Pointwise function of a Hermitian (0,0) grid field via eigendecomposition.
GridField grid_hermitian_fn(const GridField& f, const std::function<double(double)>& fn);
// Pointwise eigenvalues (ascending) of a Hermitian (0,0) grid field.
std::vector<Eigen::VectorXd> grid_eigenvalues(const GridField& f);
double grid_max_abs(const GridField& a);
// Pointwise matrix function of a Hermitian (0,0) field, truncated back to modes.
BasicField hermitian_function(const BasicField& f, const std::function<double(double)>& fn);

}  // namespace folhe
