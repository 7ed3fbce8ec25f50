#include "folhe/kernel.hpp"

#include "folhe/parallel.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace folhe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct InsertTerm {
  int src, dst, j;
  double sign;
};

// Terms for inserting zeta^j (holo) or zetabar^j (anti) in front of each component.
std::vector<InsertTerm> insert_table(int n, int p, int q, bool anti) {
  std::vector<InsertTerm> out;
  const auto comps = forms::components(n, p, q);
  for (size_t c = 0; c < comps.size(); ++c) {
    const auto [I, J] = comps[c];
    for (int j = 0; j < n; ++j) {
      const forms::Mask b = 1u << j;
      if (!anti) {
        if (I & b) continue;
        int dst = forms::comp_index(n, p + 1, q, I | b, J);
        out.push_back({static_cast<int>(c), dst, j, static_cast<double>(forms::merge_sign(b, I))});
      } else {
        if (J & b) continue;
        int dst = forms::comp_index(n, p, q + 1, I, J | b);
        double s = ((p % 2) ? -1.0 : 1.0) * forms::merge_sign(b, J);
        out.push_back({static_cast<int>(c), dst, j, s});
      }
    }
  }
  return out;
}

BasicField apply_insert(const BasicField& a, bool anti) {
  const int n = a.model()->n();
  const int p = a.p() + (anti ? 0 : 1);
  const int q = a.q() + (anti ? 1 : 0);
  if (p > n || q > n) return BasicField();
  BasicField out(a.model(), p, q, a.rank());
  const auto table = insert_table(n, a.p(), a.q(), anti);
  const auto& ms = a.model()->modes();
  FOLHE_PARALLEL_FOR
  for (long k = 0; k < static_cast<long>(ms.size()); ++k) {
    for (const auto& t : table) {
      cd kj = ms.k10[k](t.j);
      if (anti) kj = std::conj(kj);
      const cd factor = cd(0.0, kTwoPi) * kj * t.sign;
      if (factor == cd(0.0)) continue;
      out.block(k, t.dst) += factor * a.block(k, t.src);
    }
  }
  return out;
}

Eigen::MatrixXcd star_matrix(int n, int p, int q) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, Eigen::MatrixXcd> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(n, p, q);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int D = 2 * n;
  const int dim = 1 << D;
  const forms::Mask full = static_cast<forms::Mask>(dim - 1);
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim, dim);
  for (int A = 0; A < dim; ++A) R(static_cast<int>(full & ~static_cast<forms::Mask>(A)), A) = forms::hodge_sign(D, A);
  Eigen::MatrixXcd S = forms::real_to_zeta(n, n - q, n - p) * R * forms::zeta_to_real(n, p, q);
  return cache.emplace(key, S).first->second;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

BasicField del(const BasicField& a) { return apply_insert(a, false); }
BasicField delbar(const BasicField& a) { return apply_insert(a, true); }
DolbeaultPair dolbeault(const BasicField& a) { return {del(a), delbar(a)}; }

BasicField wedge_const(const BasicField& a, const forms::ConstForm& c, bool const_on_left) {
  const int n = a.model()->n();
  const int p = a.p() + c.p, q = a.q() + c.q;
  if (p > n || q > n) return BasicField();
  BasicField out(a.model(), p, q, a.rank());
  const auto table = const_on_left ? forms::wedge_table(n, c.p, c.q, a.p(), a.q())
                                   : forms::wedge_table(n, a.p(), a.q(), c.p, c.q);
  for (size_t k = 0; k < a.nmodes(); ++k) {
    for (const auto& t : table) {
      const int ca = const_on_left ? t.c2 : t.c1;
      const cd w = const_on_left ? c.c[t.c1] : c.c[t.c2];
      if (w == cd(0.0)) continue;
      out.block(k, t.cout) += (t.sign * w) * a.block(k, ca);
    }
  }
  return out;
}

BasicField lefschetz(const BasicField& a) {
  return wedge_const(a, forms::kahler_form(a.model()->n()), true);
}

BasicField contract(const BasicField& a) {
  const int n = a.model()->n();
  if (a.p() < 1 || a.q() < 1) return zero_like(a.model(), std::max(a.p() - 1, 0), std::max(a.q() - 1, 0), a.rank());
  BasicField out(a.model(), a.p() - 1, a.q() - 1, a.rank());
  const auto w = forms::kahler_form(n);
  const auto table = forms::wedge_table(n, 1, 1, a.p() - 1, a.q() - 1);
  // adjoint of omega ^ . for the pointwise product with weights 2^{p+q}
  const double ratio = forms::weight(a.p(), a.q()) / forms::weight(a.p() - 1, a.q() - 1);
  for (size_t k = 0; k < a.nmodes(); ++k) {
    for (const auto& t : table) {
      const cd cw = std::conj(w.c[t.c1]);
      if (cw == cd(0.0)) continue;
      out.block(k, t.c2) += (ratio * t.sign * cw) * a.block(k, t.cout);
    }
  }
  return out;
}

BasicField zero_like(const ModelPtr& model, int p, int q, int rank) { return BasicField(model, p, q, rank); }

BasicField wedge(const BasicField& a, const BasicField& b) {
  if (a.model() != b.model()) throw std::invalid_argument("wedge: model mismatch");
  if (a.rank() != b.rank()) throw std::invalid_argument("wedge: rank mismatch");
  const int n = a.model()->n();
  if (a.p() + b.p() > n || a.q() + b.q() > n) throw std::invalid_argument("wedge: degree overflow");
  return from_grid(grid_wedge(n, to_grid(a), to_grid(b)), a.model());
}

cd integrate(const BasicField& a) {
  const int n = a.model()->n();
  if (a.p() != n || a.q() != n) throw std::invalid_argument("integrate: needs bidegree (n,n)");
  if (a.rank() != 1) throw std::invalid_argument("integrate: needs a scalar form; use integrate_trace");
  return a.model()->volume() * forms::top_factor(n) * a.zero_mode(0)(0, 0);
}

cd integrate_trace(const BasicField& a) { return integrate(a.trace()); }

cd integrate_function(const BasicField& f) {
  if (f.p() != 0 || f.q() != 0 || f.rank() != 1) throw std::invalid_argument("integrate_function: needs scalar (0,0)");
  return f.model()->volume() * f.zero_mode(0)(0, 0);
}

BasicField hodge_star_B(const BasicField& a) {
  const int n = a.model()->n();
  BasicField out(a.model(), n - a.q(), n - a.p(), a.rank());
  const Eigen::MatrixXcd S = star_matrix(n, a.p(), a.q());
  for (size_t k = 0; k < a.nmodes(); ++k)
    for (int co = 0; co < out.ncomp(); ++co)
      for (int ci = 0; ci < a.ncomp(); ++ci)
        if (S(co, ci) != cd(0.0)) out.block(k, co) += S(co, ci) * a.block(k, ci);
  return out;
}

BasicField p_operator(const BasicField& f) {
  if (f.p() != 0 || f.q() != 0) throw std::invalid_argument("p_operator: needs bidegree (0,0)");
  if (f.model()->n() < 1) throw std::invalid_argument("p_operator: n must be >= 1");
  BasicField out = contract(delbar(del(f)));
  out *= cd(0.0, 1.0);
  return out;
}

BasicField p_adjoint(const BasicField& f) {
  if (f.p() != 0 || f.q() != 0) throw std::invalid_argument("p_adjoint: needs bidegree (0,0)");
  const int n = f.model()->n();
  BasicField lf = n > 1 ? wedge_const(f, forms::const_power(n, forms::kahler_form(n), n - 1)) : f;
  BasicField out = hodge_star_B(delbar(del(lf)));
  out *= cd(0.0, 1.0 / factorial(n - 1));
  return out;
}

BasicField poisson_solve(const BasicField& rhs, double mean_tol) {
  if (rhs.p() != 0 || rhs.q() != 0) throw std::invalid_argument("poisson_solve: needs bidegree (0,0)");
  const auto& ms = rhs.model()->modes();
  const double scale = std::max(1.0, rhs.max_coeff());
  if (rhs.zero_mode().cwiseAbs().maxCoeff() > mean_tol * scale)
    throw std::domain_error("poisson_solve: right-hand side has nonzero mean, not in Im(P)");
  BasicField phi(rhs.model(), 0, 0, rhs.rank());
  for (size_t k = 0; k < ms.size(); ++k) {
    if (k == ms.zero) continue;
    const double lam = ms.symbol[k];
    if (lam <= 0.0) throw std::logic_error("poisson_solve: vanishing symbol at a nonzero mode");
    phi.block(k, 0) = rhs.block(k, 0) / lam;
  }
  phi.set_hermitian_flag(rhs.hermitian_flag());
  return phi;
}

BasicField gauduchon_form(const BasicField& psi) {
  if (psi.p() != 0 || psi.q() != 0 || psi.rank() != 1) throw std::invalid_argument("gauduchon: psi must be scalar (0,0)");
  const int n = psi.model()->n();
  GridField g = to_grid(psi);
  const double s = static_cast<double>(n - 1);
  g = grid_hermitian_fn(g, [s](double x) { return std::exp(s * x); });
  BasicField conf = from_grid(g, psi.model());
  BasicField dd = del(delbar(conf));
  if (n == 1) return dd;
  return wedge_const(dd, forms::const_power(n, forms::kahler_form(n), n - 1));
}

double gauduchon_residual(const BasicField& psi) {
  return gauduchon_form(psi).max_coeff();
}

double gauduchon_check(const ModelPtr& model) {
  const int n = model->n();
  if (n == 1) return 0.0;
  BasicField w = BasicField::from_const_form(model, forms::const_power(n, forms::kahler_form(n), n - 1));
  return del(delbar(w)).max_coeff();
}

BasicField random_field(const ModelPtr& model, int p, int q, int rank, std::mt19937_64& rng, bool hermitian,
                        int max_mode) {
  if (hermitian && p != q) throw std::invalid_argument("random_field: Hermitian fields need p == q");
  std::normal_distribution<double> nd(0.0, 1.0);
  BasicField f(model, p, q, rank);
  const auto& ms = model->modes();
  for (size_t k = 0; k < ms.size(); ++k) {
    int amax = 0;
    double a2 = 0.0;
    for (int x : ms.a[k]) {
      amax = std::max(amax, std::abs(x));
      a2 += static_cast<double>(x) * x;
    }
    if (amax > max_mode) continue;
    const double decay = std::exp(-0.25 * a2);
    for (int c = 0; c < f.ncomp(); ++c)
      for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) f.at(k, c, i, j) = decay * cd(nd(rng), nd(rng));
  }
  if (hermitian) f.hermitize();
  return f;
}

}  // namespace folhe
