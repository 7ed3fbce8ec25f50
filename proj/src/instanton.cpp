#include "folhe/instanton.hpp"

#include "folhe/kernel.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace folhe {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

BasicField remove_trace(const BasicField& a) {
  if (a.empty()) return a;
  BasicField out = a;
  const int r = a.rank();
  for (size_t k = 0; k < a.nmodes(); ++k)
    for (int c = 0; c < a.ncomp(); ++c) {
      cd t = a.block(k, c).trace() / static_cast<double>(r);
      for (int i = 0; i < r; ++i) out.at(k, c, i, i) -= t;
    }
  return out;
}

unsigned leaf_mask(int n, int D) { return ((1u << D) - 1u) & ~((1u << (2 * n)) - 1u); }

// Adds the real expansion of a (p,q) field into acc[mask] (per mode and entry).
void accumulate(const BasicField& a, std::map<unsigned, std::vector<cd>>& acc, unsigned extra, int sign_mode) {
  if (a.empty()) return;
  const int n = a.model()->n();
  const Eigen::MatrixXcd Z = forms::zeta_to_real(n, a.p(), a.q());
  const int r = a.rank();
  const size_t per = a.nmodes() * static_cast<size_t>(r) * r;
  for (Eigen::Index m = 0; m < Z.rows(); ++m) {
    if (Z.row(m).cwiseAbs().maxCoeff() == 0.0) continue;
    const unsigned A = static_cast<unsigned>(m);
    const double s = sign_mode ? forms::merge_sign(A, extra) : 1.0;
    auto& v = acc[A | extra];
    if (v.empty()) v.assign(per, cd(0.0));
    for (size_t k = 0; k < a.nmodes(); ++k)
      for (int c = 0; c < a.ncomp(); ++c) {
        const cd z = Z(m, c) * s;
        if (z == cd(0.0)) continue;
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j) v[(k * r + i) * r + j] += z * a.at(k, c, i, j);
      }
  }
}

RealForm pack(const std::map<unsigned, std::vector<cd>>& acc, int D, int r, size_t nmodes) {
  RealForm out;
  out.D = D;
  out.r = r;
  out.nmodes = nmodes;
  for (const auto& kv : acc) out.masks.push_back(kv.first);
  const size_t rr = static_cast<size_t>(r) * r;
  out.c.assign(nmodes * out.masks.size() * rr, cd(0.0));
  for (size_t s = 0; s < out.masks.size(); ++s) {
    const auto& v = acc.at(out.masks[s]);
    for (size_t k = 0; k < nmodes; ++k)
      for (size_t e = 0; e < rr; ++e) out.c[(k * out.masks.size() + s) * rr + e] = v[k * rr + e];
  }
  return out;
}

std::map<unsigned, std::vector<cd>> unpack(const RealForm& a) {
  std::map<unsigned, std::vector<cd>> acc;
  const size_t rr = static_cast<size_t>(a.r) * a.r;
  for (size_t s = 0; s < a.masks.size(); ++s) {
    auto& v = acc[a.masks[s]];
    v.assign(a.nmodes * rr, cd(0.0));
    for (size_t k = 0; k < a.nmodes; ++k)
      for (size_t e = 0; e < rr; ++e) v[k * rr + e] = a.c[(k * a.masks.size() + s) * rr + e];
  }
  return acc;
}

RealForm difference_sum(const RealForm& a, const RealForm& b) {
  auto acc = unpack(a);
  for (auto& kv : unpack(b)) {
    auto& v = acc[kv.first];
    if (v.empty()) v.assign(kv.second.size(), cd(0.0));
    for (size_t i = 0; i < v.size(); ++i) v[i] += kv.second[i];
  }
  return pack(acc, a.D, a.r, a.nmodes);
}

// Transverse components of a form e^B ^ e^{leaf}, stripped of the leaf factor,
// returned as (p,q) fields.
std::vector<BasicField> strip_leaf(const RealForm& a, const ModelPtr& model) {
  const int n = model->n();
  const unsigned leaf = leaf_mask(n, a.D);
  const int r = a.r;
  const size_t rr = static_cast<size_t>(r) * r;
  std::vector<BasicField> out;
  int deg = -1;
  for (unsigned m : a.masks) {
    if ((m & leaf) != leaf) throw std::logic_error("strip_leaf: form is not a multiple of chi");
    deg = forms::popcount(m & ~leaf);
  }
  if (deg < 0) return out;
  for (int p = std::max(0, deg - n); p <= std::min(n, deg); ++p) {
    const int q = deg - p;
    const Eigen::MatrixXcd R = forms::real_to_zeta(n, p, q);
    BasicField x(model, p, q, r);
    for (size_t s = 0; s < a.masks.size(); ++s) {
      const unsigned B = a.masks[s] & ~leaf;
      const double sg = forms::merge_sign(B, leaf);
      for (int c = 0; c < x.ncomp(); ++c) {
        const cd z = R(c, static_cast<Eigen::Index>(B)) * sg;
        if (z == cd(0.0)) continue;
        for (size_t k = 0; k < a.nmodes; ++k)
          for (size_t e = 0; e < rr; ++e) x.data()[x.index(k, c, 0, 0) + e] += z * a.c[(k * a.masks.size() + s) * rr + e];
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

struct ConnectionH {
  BasicField a10, a01;
};

ConnectionH chern_connection_h(const BundleSpec& spec, const BasicField& f) {
  Connection conn = chern_connection(spec);
  BasicField finv = hermitian_function(f, [](double t) { return 1.0 / t; });
  BasicField x = wedge(finv, del_E(conn, f));
  apply_class_mask(spec, x);
  return {conn.a10 + x, conn.a01};
}

int model_D(const BundleSpec& spec) {
  if (spec.n() < 2) throw std::invalid_argument("instanton: needs n >= 2");
  return spec.model->d();
}

}  // namespace

double RealForm::l2_norm(double volume) const {
  double s = 0.0;
  for (const cd& z : c) s += std::norm(z);
  return std::sqrt(s * volume);
}

CurvatureForm chern_curvature(const BundleSpec& spec, const BasicField& f_in, bool trace_free) {
  const auto& model = spec.model;
  const BasicField f = f_in.empty() ? BasicField::identity(model, spec.rank()) : f_in;
  CurvatureForm F;
  F.f11 = curvature(spec, f);
  auto parts = curvature_std(spec);
  if (!parts.f02.empty()) {
    F.f02 = parts.f02;
    // F^{2,0}_h = -(F^{0,2})^{*h} = -f^{-1} (F^{0,2})^* f
    BasicField finv = hermitian_function(f, [](double t) { return 1.0 / t; });
    F.f20 = wedge(wedge(finv, parts.f02.adjoint()), f) * cd(-1.0);
  }
  if (trace_free) {
    F.f11 = remove_trace(F.f11);
    F.f02 = remove_trace(F.f02);
    F.f20 = remove_trace(F.f20);
  }
  return F;
}

RealForm to_real(const CurvatureForm& F, int D) {
  std::map<unsigned, std::vector<cd>> acc;
  for (const BasicField* a : {&F.f20, &F.f11, &F.f02}) accumulate(*a, acc, 0u, 0);
  return pack(acc, D, F.f11.rank(), F.f11.nmodes());
}

RealForm full_hodge_star(const RealForm& a) {
  const unsigned full = (1u << a.D) - 1u;
  std::map<unsigned, std::vector<cd>> acc;
  auto in = unpack(a);
  for (auto& kv : in) {
    const double s = forms::hodge_sign(a.D, kv.first);
    auto v = kv.second;
    for (auto& z : v) z *= s;
    acc[full & ~kv.first] = std::move(v);
  }
  return pack(acc, a.D, a.r, a.nmodes);
}

RealForm omega_wedge(const CurvatureForm& F, int D) {
  const int n = F.f11.model()->n();
  const auto om = forms::const_power(n, forms::kahler_form(n), n - 2);
  const double scale = 1.0 / factorial(n - 2);
  std::map<unsigned, std::vector<cd>> acc;
  const unsigned leaf = leaf_mask(n, D);
  for (const BasicField* a : {&F.f20, &F.f11, &F.f02}) {
    if (a->empty()) continue;
    BasicField g = (n > 2 ? wedge_const(*a, om, true) : *a) * cd(scale);
    // Omega ^ F = (omega^{n-2}/(n-2)! ^ F) ^ chi for even-degree F
    accumulate(g, acc, leaf, 1);
  }
  return pack(acc, D, F.f11.rank(), F.f11.nmodes());
}

InstantonReport instanton_check(const BundleSpec& spec, const BasicField& f_in) {
  InstantonReport rep;
  const int D = model_D(spec);
  const auto& model = spec.model;
  const double vol = model->volume();
  const BasicField f = f_in.empty() ? BasicField::identity(model, spec.rank()) : f_in;
  CurvatureForm full = chern_curvature(spec, f, false);
  rep.trace_norm = full.f11.trace().l2_norm();
  CurvatureForm F = chern_curvature(spec, f, true);
  RealForm real = to_real(F, D);
  rep.curvature_norm = real.l2_norm(vol);
  RealForm star = full_hodge_star(real);
  RealForm om = omega_wedge(F, D);
  rep.residual = difference_sum(star, om).l2_norm(vol);
  rep.f02_norm = F.f02.empty() ? 0.0 : F.f02.l2_norm();
  BasicField lam = contract(F.f11) * cd(0.0, 1.0);
  rep.mean_curvature = lam.l2_norm();
  // d_A (*F): *F = beta ^ chi with d chi = 0 on flat models
  ConnectionH A = chern_connection_h(spec, f);
  std::vector<BasicField> beta = strip_leaf(star, model);
  std::map<std::pair<int, int>, BasicField> out;
  auto add = [&](const BasicField& x) {
    if (x.empty()) return;
    auto key = std::make_pair(x.p(), x.q());
    auto it = out.find(key);
    if (it == out.end()) out.emplace(key, x);
    else it->second += x;
  };
  for (const auto& b : beta) {
    auto dd = dolbeault(b);
    add(dd.del);
    add(dd.delbar);
    if (b.p() < model->n()) add(graded_commutator(A.a10, b));
    if (b.q() < model->n()) add(graded_commutator(A.a01, b));
  }
  double s = 0.0;
  for (auto& kv : out) {
    apply_class_mask(spec, kv.second);
    s += std::pow(kv.second.l2_norm(), 2);
  }
  rep.ym_residual = std::sqrt(s);
  return rep;
}

double instanton_residual(const BundleSpec& spec, const BasicField& f) { return instanton_check(spec, f).residual; }
double yang_mills_residual(const BundleSpec& spec, const BasicField& f) { return instanton_check(spec, f).ym_residual; }

}  // namespace folhe
