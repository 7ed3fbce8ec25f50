#include "folhe/field.hpp"

#include "folhe/parallel.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace folhe {

namespace {

// Cached unaligned many-DFT plans keyed by (dims, howmany, sign).
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }

  fftw_plan get(const std::vector<int>& dims, int howmany, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(dims, howmany, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    size_t total = static_cast<size_t>(howmany);
    for (int m : dims) total *= static_cast<size_t>(m);
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), howmany, buf, nullptr,
                                        howmany, 1, buf, nullptr, howmany, 1, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<std::vector<int>, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void transform(std::vector<cd>& data, const std::vector<int>& dims, int howmany, int sign) {
  if (dims.empty() || howmany == 0) return;
  fftw_plan plan = plan_cache().get(dims, howmany, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

BasicField::BasicField(ModelPtr model, int p, int q, int rank)
    : model_(std::move(model)), p_(p), q_(q), r_(rank) {
  if (!model_) throw std::invalid_argument("BasicField: null model");
  const int n = model_->n();
  if (p < 0 || q < 0 || p > n || q > n) throw std::invalid_argument("BasicField: bidegree out of range");
  if (rank < 1) throw std::invalid_argument("BasicField: rank must be >= 1");
  ncomp_ = forms::ncomp(n, p, q);
  data_.assign(model_->modes().size() * static_cast<size_t>(ncomp_) * r_ * r_, cd(0.0));
}

BasicField BasicField::identity(ModelPtr model, int rank) {
  return constant(std::move(model), Eigen::MatrixXcd::Identity(rank, rank));
}

BasicField BasicField::constant(ModelPtr model, const Eigen::MatrixXcd& value) {
  BasicField f(std::move(model), 0, 0, static_cast<int>(value.rows()));
  f.block(f.model()->modes().zero, 0) = value;
  f.hermitian_ = value.isApprox(value.adjoint());
  return f;
}

BasicField BasicField::from_const_form(ModelPtr model, const forms::ConstForm& cf, int rank) {
  BasicField f(std::move(model), cf.p, cf.q, rank);
  const size_t z = f.model()->modes().zero;
  for (int c = 0; c < f.ncomp(); ++c)
    for (int i = 0; i < rank; ++i) f.at(z, c, i, i) = cf.c[c];
  return f;
}

BasicField BasicField::scalar_mode(ModelPtr model, const IntVec& k, cd c) {
  BasicField f(std::move(model), 0, 0, 1);
  long idx = f.model()->modes().find(k);
  if (idx < 0) throw std::invalid_argument("scalar_mode: k is not an admissible mode within the cutoff");
  f.at(static_cast<size_t>(idx), 0, 0, 0) = c;
  return f;
}

void BasicField::check_same_shape(const BasicField& o) const {
  if (model_ != o.model_ || p_ != o.p_ || q_ != o.q_ || r_ != o.r_)
    throw std::invalid_argument("BasicField: shape mismatch");
}

BasicField& BasicField::operator+=(const BasicField& o) {
  check_same_shape(o);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

BasicField& BasicField::operator-=(const BasicField& o) {
  check_same_shape(o);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

BasicField& BasicField::operator*=(cd s) {
  for (auto& x : data_) x *= s;
  if (s.imag() != 0.0) hermitian_ = false;
  return *this;
}

BasicField BasicField::adjoint() const {
  const int n = model_->n();
  BasicField out(model_, q_, p_, r_);
  const auto& ms = model_->modes();
  auto src = forms::components(n, p_, q_);
  const double sign = ((p_ * q_) % 2) ? -1.0 : 1.0;
  for (size_t c = 0; c < src.size(); ++c) {
    int co = forms::comp_index(n, q_, p_, src[c].second, src[c].first);
    for (size_t k = 0; k < ms.size(); ++k) out.block(k, co) = sign * block(ms.neg[k], static_cast<int>(c)).adjoint();
  }
  out.hermitian_ = hermitian_;
  return out;
}

BasicField BasicField::trace() const {
  BasicField out(model_, p_, q_, 1);
  for (size_t k = 0; k < nmodes(); ++k)
    for (int c = 0; c < ncomp_; ++c) out.at(k, c, 0, 0) = block(k, c).trace();
  out.hermitian_ = hermitian_;
  return out;
}

BasicField BasicField::entry(int i, int j) const {
  BasicField out(model_, p_, q_, 1);
  for (size_t k = 0; k < nmodes(); ++k)
    for (int c = 0; c < ncomp_; ++c) out.at(k, c, 0, 0) = at(k, c, i, j);
  return out;
}

BasicField BasicField::left_mul(const Eigen::MatrixXcd& m) const {
  BasicField out(model_, p_, q_, r_);
  for (size_t k = 0; k < nmodes(); ++k)
    for (int c = 0; c < ncomp_; ++c) out.block(k, c) = m * block(k, c);
  return out;
}

BasicField BasicField::right_mul(const Eigen::MatrixXcd& m) const {
  BasicField out(model_, p_, q_, r_);
  for (size_t k = 0; k < nmodes(); ++k)
    for (int c = 0; c < ncomp_; ++c) out.block(k, c) = block(k, c) * m;
  return out;
}

void BasicField::apply_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask) {
  if (mask.rows() != r_ || mask.cols() != r_) throw std::invalid_argument("apply_mask: wrong size");
  for (size_t k = 0; k < nmodes(); ++k)
    for (int c = 0; c < ncomp_; ++c)
      for (int i = 0; i < r_; ++i)
        for (int j = 0; j < r_; ++j)
          if (!mask(i, j)) at(k, c, i, j) = 0.0;
}

double BasicField::max_coeff() const {
  double m = 0.0;
  for (const auto& x : data_) m = std::max(m, std::abs(x));
  return m;
}

cd BasicField::inner(const BasicField& o) const {
  check_same_shape(o);
  cd s = 0.0;
  for (size_t i = 0; i < data_.size(); ++i) s += data_[i] * std::conj(o.data_[i]);
  return s * forms::weight(p_, q_) * model_->volume();
}

double BasicField::l2_norm() const { return std::sqrt(std::abs(inner(*this))); }

Eigen::MatrixXcd BasicField::zero_mode(int comp) const { return block(model_->modes().zero, comp); }

double BasicField::hermitian_residual() const {
  if (p_ != q_) throw std::invalid_argument("hermitian_residual: needs bidegree (p,p)");
  BasicField d = *this - adjoint();
  return d.max_coeff();
}

void BasicField::hermitize() {
  if (p_ != q_) throw std::invalid_argument("hermitize: needs bidegree (p,p)");
  BasicField adj = adjoint();
  for (size_t i = 0; i < data_.size(); ++i) data_[i] = 0.5 * (data_[i] + adj.data_[i]);
  hermitian_ = true;
}

GridField to_grid(const BasicField& a) {
  const auto& ms = a.model()->modes();
  GridField g;
  g.p = a.p();
  g.q = a.q();
  g.r = a.rank();
  g.ncomp = a.ncomp();
  g.points = ms.grid_points;
  const size_t st = g.stride();
  g.v.assign(g.points * st, cd(0.0));
  for (size_t k = 0; k < ms.size(); ++k) {
    const cd* src = &a.data()[a.index(k, 0, 0, 0)];
    cd* dst = &g.v[ms.grid_slot[k] * st];
    for (size_t s = 0; s < st; ++s) dst[s] = src[s];
  }
  transform(g.v, ms.grid_dims, static_cast<int>(st), FFTW_BACKWARD);
  return g;
}

BasicField from_grid(const GridField& g, const ModelPtr& model) {
  const auto& ms = model->modes();
  if (g.points != ms.grid_points) throw std::invalid_argument("from_grid: grid size mismatch");
  std::vector<cd> tmp = g.v;
  const size_t st = g.stride();
  transform(tmp, ms.grid_dims, static_cast<int>(st), FFTW_FORWARD);
  BasicField out(model, g.p, g.q, g.r);
  const double scale = 1.0 / static_cast<double>(ms.grid_points);
  for (size_t k = 0; k < ms.size(); ++k) {
    const cd* src = &tmp[ms.grid_slot[k] * st];
    cd* dst = &out.data()[out.index(k, 0, 0, 0)];
    for (size_t s = 0; s < st; ++s) dst[s] = src[s] * scale;
  }
  return out;
}

GridField grid_wedge(int n, const GridField& a, const GridField& b) {
  if (a.points != b.points || a.r != b.r) throw std::invalid_argument("grid_wedge: shape mismatch");
  GridField out;
  out.p = a.p + b.p;
  out.q = a.q + b.q;
  out.r = a.r;
  out.points = a.points;
  if (out.p > n || out.q > n) throw std::invalid_argument("grid_wedge: degree overflow");
  out.ncomp = forms::ncomp(n, out.p, out.q);
  out.v.assign(out.points * out.stride(), cd(0.0));
  const auto table = forms::wedge_table(n, a.p, a.q, b.p, b.q);
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(out.points); ++pt) {
    for (const auto& t : table) {
      out.mat(pt, t.cout).noalias() += t.sign * (a.mat(pt, t.c1) * b.mat(pt, t.c2));
    }
  }
  return out;
}

GridField grid_sum(const GridField& a, const GridField& b, cd sb) {
  if (a.points != b.points || a.r != b.r || a.p != b.p || a.q != b.q)
    throw std::invalid_argument("grid_sum: shape mismatch");
  GridField out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += sb * b.v[i];
  return out;
}

GridField grid_hermitian_fn(const GridField& f, const std::function<double(double)>& fn) {
  if (f.p != 0 || f.q != 0) throw std::invalid_argument("grid_hermitian_fn: needs a (0,0) field");
  GridField out = f;
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(f.points); ++pt) {
    Eigen::MatrixXcd m = f.mat(pt, 0);
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = fn(ev(i));
    out.mat(pt, 0) = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  }
  return out;
}

std::vector<Eigen::VectorXd> grid_eigenvalues(const GridField& f) {
  std::vector<Eigen::VectorXd> out(f.points);
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(f.points); ++pt) {
    Eigen::MatrixXcd m = f.mat(pt, 0);
    m = 0.5 * (m + m.adjoint()).eval();
    out[pt] = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  }
  return out;
}

BasicField hermitian_function(const BasicField& f, const std::function<double(double)>& fn) {
  BasicField out = from_grid(grid_hermitian_fn(to_grid(f), fn), f.model());
  out.hermitize();
  return out;
}

double grid_max_abs(const GridField& a) {
  double m = 0.0;
  for (const auto& x : a.v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace folhe
