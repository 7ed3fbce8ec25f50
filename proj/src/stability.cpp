#include "folhe/stability.hpp"

#include "folhe/he_solver.hpp"
#include "folhe/kernel.hpp"
#include "folhe/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace folhe {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// delbar symbol per mode and (0,1) component.
BasicField delbar_symbol(const ModelPtr& model) {
  BasicField ones(model, 0, 0, 1);
  for (size_t k = 0; k < ones.nmodes(); ++k) ones.at(k, 0, 0, 0) = 1.0;
  return delbar(ones);
}

std::vector<size_t> support(const BasicField& b) {
  std::vector<size_t> out;
  if (b.empty()) return out;
  const size_t per = static_cast<size_t>(b.ncomp()) * b.rank() * b.rank();
  for (size_t k = 0; k < b.nmodes(); ++k) {
    for (size_t e = 0; e < per; ++e)
      if (b.data()[k * per + e] != cd(0.0)) {
        out.push_back(k);
        break;
      }
  }
  return out;
}

long shifted_mode(const ModeSet& ms, size_t k, size_t m) {
  IntVec v = ms.k[k];
  for (size_t i = 0; i < v.size(); ++i) v[i] += ms.k[m][i];
  return ms.find(v);
}

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

BasicField diagonal_part(const BasicField& b) {
  BasicField out(b.model(), b.p(), b.q(), b.rank());
  for (size_t k = 0; k < b.nmodes(); ++k)
    for (int c = 0; c < b.ncomp(); ++c)
      for (int i = 0; i < b.rank(); ++i) out.at(k, c, i, i) = b.at(k, c, i, i);
  return out;
}

double factor_degree(const BundleSpec& spec, int i) {
  double s = 0.0;
  for (int c : spec.factors[i].c) s += c;
  return factorial(spec.n() - 1) * s;
}

std::vector<std::vector<int>> class_members(const BundleSpec& spec) {
  const auto cls = spec.classes();
  std::map<int, std::vector<int>> m;
  for (int i = 0; i < spec.rank(); ++i) m[cls[i]].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& kv : m) out.push_back(kv.second);
  return out;
}

// Max |b(i, j)| over i in rows, j in cols.
double block_max(const BasicField& b, const std::vector<bool>& rows, const std::vector<bool>& cols) {
  double m = 0.0;
  for (size_t k = 0; k < b.nmodes(); ++k)
    for (int c = 0; c < b.ncomp(); ++c)
      for (int i = 0; i < b.rank(); ++i)
        for (int j = 0; j < b.rank(); ++j)
          if (rows[i] && cols[j]) m = std::max(m, std::abs(b.at(k, c, i, j)));
  return m;
}

BasicField coordinate_projection(const BundleSpec& spec, const std::vector<int>& idx) {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(spec.rank(), spec.rank());
  for (int i : idx) p(i, i) = 1.0;
  BasicField out = BasicField::constant(spec.model, p);
  out.set_hermitian_flag(true);
  return out;
}

bool lower_entries(const BasicField& b) {
  for (size_t k = 0; k < b.nmodes(); ++k)
    for (int c = 0; c < b.ncomp(); ++c)
      for (int i = 0; i < b.rank(); ++i)
        for (int j = 0; j < i; ++j)
          if (b.at(k, c, i, j) != cd(0.0)) return true;
  return false;
}

}  // namespace

BasicField sub_block(const BasicField& a, const std::vector<int>& idx) {
  const int s = static_cast<int>(idx.size());
  BasicField out(a.model(), a.p(), a.q(), s);
  for (size_t k = 0; k < a.nmodes(); ++k)
    for (int c = 0; c < a.ncomp(); ++c)
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) out.at(k, c, i, j) = a.at(k, c, idx[i], idx[j]);
  return out;
}

double subbundle_degree(const BundleSpec& spec, const BasicField& f_in, const BasicField& pi, int* rank) {
  const auto& model = spec.model;
  const int r = spec.rank();
  const double tr = integrate_function(pi.trace()).real() / model->volume();
  const double rounded = std::round(tr);
  if (std::abs(tr - rounded) > 1e-3) throw std::domain_error("subbundle: tr(pi) is not an integer rank");
  if (rank) *rank = static_cast<int>(rounded);
  BasicField f = f_in.empty() ? BasicField::identity(model, r) : f_in;
  Connection conn = chern_connection(spec);
  BasicField k = mean_curvature(spec, f);
  const double tpk = integrate_function(wedge(pi, k).trace()).real();
  BasicField dp = delbar_E(conn, pi);
  apply_class_mask(spec, dp);
  double nd2 = 0.0;
  if (f_in.empty()) {
    nd2 = std::pow(dp.l2_norm(), 2);
  } else {
    BasicField sh = hermitian_function(f, [](double t) { return std::sqrt(t); });
    BasicField shi = hermitian_function(f, [](double t) { return 1.0 / std::sqrt(t); });
    nd2 = std::pow(wedge(wedge(sh, dp), shi).l2_norm(), 2);
  }
  return factorial(spec.n() - 1) / (2.0 * kPi) * (tpk - nd2);
}

double subbundle_slope(const BundleSpec& spec, const BasicField& f, const BasicField& pi) {
  int s = 0;
  const double deg = subbundle_degree(spec, f, pi, &s);
  if (s <= 0) throw std::domain_error("subbundle: zero rank");
  return deg / s;
}

std::vector<SubbundleCandidate> enumerate_subobjects(const BundleSpec& spec) {
  const int r = spec.rank();
  if (r > 12) throw std::invalid_argument("enumerate_subobjects: rank too large");
  const double tol = 1e-12 * std::max(1.0, spec.b01.max_coeff());
  std::vector<SubbundleCandidate> out(static_cast<size_t>((1u << r) - 2));
  Connection conn = chern_connection(spec);
  const BasicField id = BasicField::identity(spec.model, r);
  FOLHE_PARALLEL_FOR
  for (long s = 1; s < (1L << r) - 1; ++s) {
    SubbundleCandidate& c = out[static_cast<size_t>(s - 1)];
    std::vector<bool> in(r), outside(r);
    for (int i = 0; i < r; ++i) {
      in[i] = (s >> i) & 1;
      outside[i] = !in[i];
      if (in[i]) c.factors.push_back(i);
    }
    c.rank = static_cast<int>(c.factors.size());
    for (int i : c.factors) c.degree += factor_degree(spec, i);
    c.slope = c.degree / c.rank;
    c.holomorphic = block_max(spec.b01, outside, in) <= tol;
    const bool split = c.holomorphic && block_max(spec.b01, in, outside) <= tol;
    c.origin = (c.holomorphic && !split) ? "extension kernel" : "sub-sum";
    c.pi = coordinate_projection(spec, c.factors);
    c.cw_degree = projection_degree(spec, c.pi);
    BasicField dp = delbar_E(conn, c.pi);
    apply_class_mask(spec, dp);
    c.weak_holomorphy = wedge(id - c.pi, dp).l2_norm();
  }
  return out;
}

KernelReport delbar_kernel(const ModelPtr& model, const BasicField& b_left, const BasicField& b_right, int rl, int rr,
                           bool want_basis, double threshold) {
  const ModeSet& ms = model->modes();
  const int n = model->n();
  const size_t nm = ms.size();
  const BasicField sym = delbar_symbol(model);
  const auto supp_l = support(b_left), supp_r = support(b_right);
  UnionFind uf(nm);
  for (size_t k = 0; k < nm; ++k) {
    for (size_t m : supp_l) {
      long t = shifted_mode(ms, k, m);
      if (t >= 0) uf.unite(k, static_cast<size_t>(t));
    }
    for (size_t m : supp_r) {
      long t = shifted_mode(ms, k, m);
      if (t >= 0) uf.unite(k, static_cast<size_t>(t));
    }
  }
  std::map<size_t, std::vector<size_t>> groups;
  for (size_t k = 0; k < nm; ++k) groups[uf.find(k)].push_back(k);
  std::vector<std::vector<size_t>> comps;
  for (auto& kv : groups) comps.push_back(std::move(kv.second));

  const int ne = rl * rr;
  const int rbig = std::max(rl, rr);
  struct Part {
    std::vector<double> sv;
    std::vector<BasicField> basis;
  };
  std::vector<Part> parts(comps.size());
  FOLHE_PARALLEL_FOR
  for (long g = 0; g < static_cast<long>(comps.size()); ++g) {
    const auto& modes = comps[static_cast<size_t>(g)];
    std::map<size_t, int> pos;
    for (size_t a = 0; a < modes.size(); ++a) pos[modes[a]] = static_cast<int>(a);
    const int cols = static_cast<int>(modes.size()) * ne;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(cols) * n, cols);
    auto row = [&](int mode_pos, int comp, int i, int j) { return (mode_pos * n + comp) * ne + i * rr + j; };
    for (size_t a = 0; a < modes.size(); ++a) {
      const size_t k = modes[a];
      const int ka = static_cast<int>(a);
      for (int i = 0; i < rl; ++i)
        for (int j = 0; j < rr; ++j) {
          const int col = ka * ne + i * rr + j;
          for (int c = 0; c < n; ++c) A(row(ka, c, i, j), col) += sym.at(k, c, 0, 0);
          for (size_t m : supp_l) {
            long t = shifted_mode(ms, k, m);
            if (t < 0) continue;
            const int ta = pos.at(static_cast<size_t>(t));
            for (int c = 0; c < n; ++c)
              for (int i2 = 0; i2 < rl; ++i2) A(row(ta, c, i2, j), col) += b_left.at(m, c, i2, i);
          }
          for (size_t m : supp_r) {
            long t = shifted_mode(ms, k, m);
            if (t < 0) continue;
            const int ta = pos.at(static_cast<size_t>(t));
            for (int c = 0; c < n; ++c)
              for (int j2 = 0; j2 < rr; ++j2) A(row(ta, c, i, j2), col) -= b_right.at(m, c, j, j2);
          }
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, want_basis ? Eigen::ComputeFullV : 0);
    Part& part = parts[static_cast<size_t>(g)];
    const auto& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) part.sv.push_back(s(i));
    if (want_basis) {
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) >= threshold) continue;
        Eigen::VectorXcd v = svd.matrixV().col(i);
        BasicField x(model, 0, 0, rbig);
        for (size_t a = 0; a < modes.size(); ++a)
          for (int p = 0; p < rl; ++p)
            for (int q = 0; q < rr; ++q) x.at(modes[a], 0, p, q) = v(static_cast<Eigen::Index>(a) * ne + p * rr + q);
        part.basis.push_back(std::move(x));
      }
    }
  }
  KernelReport rep;
  rep.threshold = threshold;
  rep.gap = std::numeric_limits<double>::infinity();
  for (auto& p : parts) {
    for (double s : p.sv) {
      if (s < threshold) {
        ++rep.dim;
        rep.largest_kernel = std::max(rep.largest_kernel, s);
      } else {
        rep.gap = std::min(rep.gap, s);
      }
    }
    for (auto& b : p.basis) rep.basis.push_back(std::move(b));
  }
  return rep;
}

StabilityReport stability_verdict(const BundleSpec& spec) {
  StabilityReport rep;
  for (int i = 0; i < spec.rank(); ++i) rep.mu += factor_degree(spec, i);
  rep.mu /= spec.rank();
  if (spec.n() != 1) {
    rep.verdict = "UNSUPPORTED";
    rep.message = "stability verdicts need a model with one transverse complex dimension";
    return rep;
  }
  if (lower_entries(spec.b01)) {
    rep.verdict = "UNSUPPORTED";
    rep.message = "holomorphic structure is not an iterated extension of the factor list";
    return rep;
  }
  rep.candidates = enumerate_subobjects(spec);
  rep.max_sub_slope = -std::numeric_limits<double>::infinity();
  for (const auto& c : rep.candidates)
    if (c.holomorphic) rep.max_sub_slope = std::max(rep.max_sub_slope, c.slope);
  if (rep.max_sub_slope > rep.mu + 1e-9) {
    rep.verdict = "unstable";
    return rep;
  }
  if (spec.rank() == 1) {
    rep.verdict = "stable";
    return rep;
  }
  // Semistable; polystable exactly when dim H^0(End E) matches the split bundle.
  rep.kernel_gap = std::numeric_limits<double>::infinity();
  for (const auto& idx : class_members(spec)) {
    const int s = static_cast<int>(idx.size());
    BasicField b = sub_block(spec.b01, idx);
    auto full = delbar_kernel(spec.model, b, b, s, s);
    BasicField bg = diagonal_part(b);
    auto graded = delbar_kernel(spec.model, bg, bg, s, s);
    rep.end_dim += full.dim;
    rep.end_dim_graded += graded.dim;
    rep.kernel_gap = std::min({rep.kernel_gap, full.gap, graded.gap});
  }
  if (rep.kernel_gap < 1e-3) {
    rep.verdict = "UNSUPPORTED";
    rep.message = "numerical kernel of delbar on End(E) is not separated";
    return rep;
  }
  rep.verdict = rep.end_dim == rep.end_dim_graded ? "polystable-not-stable" : "semistable-not-polystable";
  return rep;
}

VanishingReport vanishing_check(const BundleSpec& spec, const BasicField& f_in) {
  VanishingReport rep;
  const auto& model = spec.model;
  const int n = spec.n();
  const int r = spec.rank();
  const BasicField f = f_in.empty() ? BasicField::identity(model, r) : f_in;
  Connection conn = chern_connection(spec);
  BasicField sh, finv, def;
  if (!f_in.empty()) {
    sh = hermitian_function(f, [](double t) { return std::sqrt(t); });
    finv = hermitian_function(f, [](double t) { return 1.0 / t; });
    def = del_E(conn, f);
  }
  for (const auto& idx : class_members(spec)) {
    VanishingClass vc;
    vc.c = spec.factors[idx[0]].c;
    vc.rank = static_cast<int>(idx.size());
    vc.degree = factor_degree(spec, idx[0]) * vc.rank;
    const bool flat = std::all_of(vc.c.begin(), vc.c.end(), [](int c) { return c == 0; });
    const bool negative_plane = std::any_of(vc.c.begin(), vc.c.end(), [](int c) { return c < 0; });
    if (flat) {
      vc.method = "fourier-svd";
      auto k = delbar_kernel(model, sub_block(spec.b01, idx), BasicField(), vc.rank, 1, true);
      vc.dim = k.dim;
      vc.gap = k.gap;
      if (!f_in.empty()) {
        for (const auto& v : k.basis) {
          BasicField s(model, 0, 0, r);
          for (size_t m = 0; m < s.nmodes(); ++m)
            for (int a = 0; a < vc.rank; ++a) s.at(m, 0, idx[a], 0) = v.at(m, 0, a, 0);
          const double norm = wedge(sh, s).l2_norm();
          BasicField d10 = del(s) + wedge(conn.a10, s) + wedge(finv, wedge(def, s));
          BasicField d01 = delbar(s) + wedge(conn.a01, s);
          const double a = wedge(sh, d10).l2_norm(), b = wedge(sh, d01).l2_norm();
          vc.max_covariant_derivative = std::max(vc.max_covariant_derivative, std::hypot(a, b) / norm);
        }
        if (vc.max_covariant_derivative >= 1e-8) rep.ok = false;
      }
    } else if (negative_plane) {
      // Weitzenboeck: the lowest eigenvalue of delbar^* delbar on a negative
      // plane factor is bounded below by its curvature.
      vc.method = "weitzenbock";
      vc.dim = 0;
    } else if (n == 1) {
      vc.method = "riemann-roch";
      vc.dim = vc.rank * vc.c[0];
    } else {
      vc.method = "not computed";
    }
    if (vc.degree < 0 && vc.dim != 0) rep.ok = false;
    if (vc.dim > 0) rep.total_dim += vc.dim;
    rep.classes.push_back(vc);
  }
  return rep;
}

namespace {

bool invariant(const BundleSpec& spec, const std::vector<bool>& in, double tol) {
  std::vector<bool> outside(in.size());
  for (size_t i = 0; i < in.size(); ++i) outside[i] = !in[i];
  return block_max(spec.b01, outside, in) <= tol;
}

FiltrationStep make_step(const BundleSpec& spec, const std::vector<bool>& in, const FiltrationStep* prev) {
  FiltrationStep st;
  for (int i = 0; i < spec.rank(); ++i)
    if (in[i]) {
      st.factors.push_back(i);
      st.degree += factor_degree(spec, i);
    }
  st.rank = static_cast<int>(st.factors.size());
  st.quotient_rank = st.rank - (prev ? prev->rank : 0);
  st.quotient_degree = st.degree - (prev ? prev->degree : 0.0);
  st.quotient_slope = st.quotient_degree / st.quotient_rank;
  return st;
}

bool supported(const BundleSpec& spec, Filtration& out) {
  if (spec.n() != 1 || lower_entries(spec.b01) || spec.rank() > 12) {
    out.status = "UNSUPPORTED";
    return false;
  }
  out.supported = true;
  out.status = "ok";
  return true;
}

}  // namespace

Filtration harder_narasimhan(const BundleSpec& spec) {
  Filtration out;
  if (!supported(spec, out)) return out;
  const int r = spec.rank();
  const double tol = 1e-12 * std::max(1.0, spec.b01.max_coeff());
  unsigned cur = 0;
  const unsigned full = (1u << r) - 1;
  while (cur != full) {
    unsigned best = 0;
    double best_slope = -std::numeric_limits<double>::infinity();
    int best_rank = 0;
    for (unsigned t = 1; t <= full; ++t) {
      if ((t & cur) != cur || t == cur) continue;
      std::vector<bool> in(r);
      for (int i = 0; i < r; ++i) in[i] = (t >> i) & 1;
      if (!invariant(spec, in, tol)) continue;
      double deg = 0.0;
      int rk = 0;
      for (int i = 0; i < r; ++i)
        if (in[i] && !((cur >> i) & 1)) {
          deg += factor_degree(spec, i);
          ++rk;
        }
      const double s = deg / rk;
      if (s > best_slope + 1e-12 || (std::abs(s - best_slope) <= 1e-12 && rk > best_rank)) {
        best = t;
        best_slope = s;
        best_rank = rk;
      }
    }
    std::vector<bool> in(r);
    for (int i = 0; i < r; ++i) in[i] = (best >> i) & 1;
    out.steps.push_back(make_step(spec, in, out.steps.empty() ? nullptr : &out.steps.back()));
    cur = best;
  }
  return out;
}

Filtration jordan_holder(const BundleSpec& spec) {
  Filtration out;
  if (!supported(spec, out)) return out;
  auto hn = harder_narasimhan(spec);
  if (hn.steps.size() != 1) {
    out.supported = false;
    out.status = "UNSUPPORTED: bundle is not semistable";
    return out;
  }
  const int r = spec.rank();
  const double tol = 1e-12 * std::max(1.0, spec.b01.max_coeff());
  std::vector<bool> in(r, false);
  for (int step = 0; step < r; ++step) {
    int pick = -1;
    for (int j = 0; j < r && pick < 0; ++j) {
      if (in[j]) continue;
      in[j] = true;
      if (invariant(spec, in, tol)) pick = j;
      in[j] = false;
    }
    if (pick < 0) throw std::logic_error("jordan_holder: no invariant refinement");
    in[pick] = true;
    out.steps.push_back(make_step(spec, in, out.steps.empty() ? nullptr : &out.steps.back()));
  }
  return out;
}

}  // namespace folhe
