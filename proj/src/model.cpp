#include "folhe/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace folhe {

namespace {

constexpr double kGeomTol = 1e-10;

Eigen::MatrixXd standard_J(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    J(2 * j + 1, 2 * j) = 1.0;
    J(2 * j, 2 * j + 1) = -1.0;
  }
  return J;
}

}  // namespace

Model::Model(ModelParams p) : p_(std::move(p)) {
  if (p_.n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (p_.m < 0 || p_.d != 2 * p_.n + p_.m)
    throw std::invalid_argument("model: d must equal 2n + m");
  if (static_cast<int>(p_.xi.size()) != p_.m)
    throw std::invalid_argument("model: expected m rows of xi");
  for (const auto& row : p_.xi)
    if (static_cast<int>(row.size()) != p_.d) throw std::invalid_argument("model: xi row length must be d");
  if (p_.cutoff < 0) throw std::invalid_argument("model: cutoff must be >= 0");
  if (!(p_.chi > 0.0)) throw std::invalid_argument("model: chi must be positive");

  if (p_.m > 0) {
    Eigen::MatrixXd xn(p_.m, p_.d);
    for (int i = 0; i < p_.m; ++i)
      for (int j = 0; j < p_.d; ++j) xn(i, j) = p_.xi[i][j].value();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xn);
    if (lu.rank() != p_.m) throw std::invalid_argument("model: rows of xi must be linearly independent");
    basis_ = integer_kernel(relation_rows(p_.xi), p_.d);
  } else {
    for (int i = 0; i < p_.d; ++i) {
      IntVec e(p_.d, 0);
      e[i] = 1;
      basis_.push_back(e);
    }
  }
  if (d_eff() > 2 * p_.n) throw std::logic_error("model: admissible lattice rank exceeds 2n");
  build_frames();
  build_modes();
}

std::shared_ptr<const Model> Model::create(const ModelParams& params) {
  return std::shared_ptr<const Model>(new Model(params));
}

std::shared_ptr<const Model> Model::product(int n, int m, int cutoff) {
  ModelParams p;
  p.n = n;
  p.m = m;
  p.d = 2 * n + m;
  p.cutoff = cutoff;
  for (int j = 0; j < m; ++j) {
    SymVec row(p.d, SymReal(0));
    row[2 * n + j] = SymReal(1);
    p.xi.push_back(row);
  }
  return create(p);
}

void Model::build_frames() {
  const int n2 = 2 * p_.n;
  const int d = p_.d;
  Eigen::MatrixXd xn(p_.m, d);
  for (int i = 0; i < p_.m; ++i)
    for (int j = 0; j < d; ++j) xn(i, j) = p_.xi[i][j].value();

  if (p_.theta.size() > 0) {
    if (p_.theta.rows() != n2 || p_.theta.cols() != d)
      throw std::invalid_argument("model: theta must be 2n x d");
    theta_ = p_.theta;
  } else if (full_transverse_lattice()) {
    theta_.resize(n2, d);
    for (int a = 0; a < n2; ++a)
      for (int j = 0; j < d; ++j) theta_(a, j) = static_cast<double>(basis_[a][j]);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xn, Eigen::ComputeFullV);
    Eigen::MatrixXd V = svd.matrixV();
    theta_.resize(n2, d);
    for (int a = 0; a < n2; ++a) {
      Eigen::VectorXd col = V.col(p_.m + a);
      int lead = 0;
      col.cwiseAbs().maxCoeff(&lead);
      if (col(lead) < 0) col = -col;
      theta_.row(a) = col.transpose();
    }
  }
  if (p_.m > 0 && (theta_ * xn.transpose()).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: theta must annihilate the foliation directions");
  Eigen::MatrixXd gram = theta_ * theta_.transpose();
  if (Eigen::FullPivLU<Eigen::MatrixXd>(gram).rank() != n2)
    throw std::invalid_argument("model: theta must have rank 2n");
  theta_pinv_ = gram.inverse() * theta_;

  g_ = p_.g.size() > 0 ? p_.g : Eigen::MatrixXd::Identity(n2, n2);
  J_ = p_.J.size() > 0 ? p_.J : standard_J(p_.n);
  if (g_.rows() != n2 || g_.cols() != n2 || J_.rows() != n2 || J_.cols() != n2)
    throw std::invalid_argument("model: g and J must be 2n x 2n");
  if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: g must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g_);
  if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("model: g must be positive definite");
  if ((J_ * J_ + Eigen::MatrixXd::Identity(n2, n2)).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: J must satisfy J^2 = -1");
  if ((J_.transpose() * g_ * J_ - g_).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: g must be J-invariant");
  omega_ = J_.transpose() * g_;
  if ((omega_ + omega_.transpose()).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: omega must be antisymmetric");
  if (p_.omega.size() > 0 && (p_.omega - omega_).cwiseAbs().maxCoeff() > kGeomTol)
    throw std::invalid_argument("model: omega does not match g(J., .)");

  // g-orthonormal basis v1, J v1, v3, J v3, ...
  adapted_ = Eigen::MatrixXd::Zero(n2, n2);
  int filled = 0;
  for (int a = 0; a < n2 && filled < n2; ++a) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n2, a);
    for (int pass = 0; pass < 2; ++pass)
      for (int b = 0; b < filled; ++b) v -= (adapted_.col(b).transpose() * g_ * v)(0) * adapted_.col(b);
    double nv = std::sqrt((v.transpose() * g_ * v)(0));
    if (nv < 1e-8) continue;
    v /= nv;
    adapted_.col(filled) = v;
    adapted_.col(filled + 1) = J_ * v;
    filled += 2;
  }
  if (filled != n2) throw std::logic_error("model: failed to build adapted basis");

  holo_.resize(n2, p_.n);
  for (int a = 0; a < n2; ++a)
    for (int j = 0; j < p_.n; ++j)
      holo_(a, j) = cd(adapted_(a, 2 * j), -adapted_(a, 2 * j + 1)) * 0.5;

  // Vol = chi * sqrt(det g) / |det [lifts of the dual frame | xi]|
  Eigen::MatrixXd M(d, d);
  Eigen::MatrixXd lifts = theta_.transpose() * gram.inverse();
  M.leftCols(n2) = lifts;
  if (p_.m > 0) M.rightCols(p_.m) = xn.transpose();
  double detM = std::abs(M.determinant());
  if (detM < 1e-300) throw std::invalid_argument("model: degenerate transverse frame");
  volume_ = p_.chi * std::sqrt(g_.determinant()) / detM;
}

void Model::build_modes() {
  ModeSet& ms = modes_;
  ms.cutoff = p_.cutoff;
  ms.d_eff = d_eff();
  const int r = ms.d_eff;
  const int d = p_.d;
  const long N = p_.cutoff;

  std::vector<int> bound(r, 0);
  if (r > 0) {
    Eigen::MatrixXd B(d, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < d; ++j) B(j, i) = static_cast<double>(basis_[i][j]);
    Eigen::MatrixXd pinv = (B.transpose() * B).inverse() * B.transpose();
    for (int i = 0; i < r; ++i)
      bound[i] = static_cast<int>(std::floor(pinv.row(i).cwiseAbs().sum() * static_cast<double>(N) + 1e-9));
  }

  std::vector<int> a(r);
  for (int i = 0; i < r; ++i) a[i] = -bound[i];
  for (;;) {
    IntVec k(d, 0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < d; ++j) k[j] += static_cast<long long>(a[i]) * basis_[i][j];
    bool inside = true;
    for (long long x : k)
      if (std::llabs(x) > N) inside = false;
    if (inside) {
      ms.lookup[k] = ms.k.size();
      ms.k.push_back(k);
      ms.a.push_back(a);
    }
    int i = r - 1;
    while (i >= 0 && a[i] == bound[i]) {
      a[i] = -bound[i];
      --i;
    }
    if (i < 0) break;
    ++a[i];
  }

  const size_t nm = ms.k.size();
  ms.neg.resize(nm);
  ms.k10.resize(nm);
  ms.symbol.resize(nm);
  for (size_t idx = 0; idx < nm; ++idx) {
    IntVec mk = ms.k[idx];
    for (auto& x : mk) x = -x;
    ms.neg[idx] = ms.lookup.at(mk);
    bool zero = true;
    for (long long x : ms.k[idx])
      if (x != 0) zero = false;
    if (zero) ms.zero = idx;
    ms.k10[idx] = holomorphic_part(theta_coords(ms.k[idx]));
    ms.symbol[idx] = 8.0 * std::numbers::pi * std::numbers::pi * ms.k10[idx].squaredNorm();
  }

  ms.grid_dims.assign(r, 1);
  for (int i = 0; i < r; ++i) {
    int amax = 0;
    for (const auto& av : ms.a) amax = std::max(amax, std::abs(av[i]));
    int M = 3 * amax + 1;
    if (amax > 0 && M % 2 == 1) ++M;
    ms.grid_dims[i] = M;
  }
  ms.grid_points = 1;
  for (int M : ms.grid_dims) ms.grid_points *= static_cast<size_t>(M);
  ms.grid_slot.resize(nm);
  for (size_t idx = 0; idx < nm; ++idx) {
    size_t lin = 0;
    for (int i = 0; i < r; ++i) {
      int M = ms.grid_dims[i];
      int ai = ((ms.a[idx][i] % M) + M) % M;
      lin = lin * static_cast<size_t>(M) + static_cast<size_t>(ai);
    }
    ms.grid_slot[idx] = lin;
  }
}

bool Model::is_admissible(const IntVec& k) const {
  if (static_cast<int>(k.size()) != p_.d) throw std::invalid_argument("is_admissible: wrong length");
  return annihilates(k, p_.xi);
}

Eigen::VectorXd Model::theta_coords(const IntVec& k) const {
  Eigen::VectorXd kv(p_.d);
  for (int j = 0; j < p_.d; ++j) kv(j) = static_cast<double>(k[j]);
  return theta_pinv_ * kv;
}

Eigen::VectorXcd Model::holomorphic_part(const Eigen::VectorXd& kappa) const {
  return holo_.transpose() * kappa.cast<cd>();
}

std::string Model::normalization() const {
  std::ostringstream os;
  os.precision(17);
  os << "Vol(X)=" << volume_ << " (integral of omega^n/n! ^ chi), chi(xi)=" << p_.chi
     << ", basic lattice rank=" << d_eff() << ", cutoff=" << p_.cutoff;
  return os.str();
}

}  // namespace folhe
