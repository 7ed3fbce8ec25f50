#include "folhe/forms.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace folhe::forms {

int popcount(Mask m) { return std::popcount(m); }

std::vector<Mask> subsets(int n, int size) {
  std::vector<Mask> out;
  if (size < 0 || size > n) return out;
  // Lexicographic order of the sorted element lists.
  std::vector<int> idx(size);
  for (int i = 0; i < size; ++i) idx[i] = i;
  for (;;) {
    Mask m = 0;
    for (int x : idx) m |= 1u << x;
    out.push_back(m);
    int i = size - 1;
    while (i >= 0 && idx[i] == n - size + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

int ncomp(int n, int p, int q) {
  auto binom = [](int a, int b) {
    if (b < 0 || b > a) return 0;
    long r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return static_cast<int>(r);
  };
  return binom(n, p) * binom(n, q);
}

std::vector<std::pair<Mask, Mask>> components(int n, int p, int q) {
  std::vector<std::pair<Mask, Mask>> out;
  for (Mask I : subsets(n, p))
    for (Mask J : subsets(n, q)) out.emplace_back(I, J);
  return out;
}

int comp_index(int n, int p, int q, Mask I, Mask J) {
  auto sp = subsets(n, p);
  auto sq = subsets(n, q);
  int iI = -1, iJ = -1;
  for (size_t i = 0; i < sp.size(); ++i)
    if (sp[i] == I) iI = static_cast<int>(i);
  for (size_t j = 0; j < sq.size(); ++j)
    if (sq[j] == J) iJ = static_cast<int>(j);
  if (iI < 0 || iJ < 0) return -1;
  return iI * static_cast<int>(sq.size()) + iJ;
}

int merge_sign(Mask A, Mask B) {
  if (A & B) return 0;
  int inversions = 0;
  for (int b = 0; b < 32; ++b) {
    if (!(B & (1u << b))) continue;
    inversions += std::popcount(A >> (b + 1));
  }
  return (inversions % 2) ? -1 : 1;
}

int wedge_sign(Mask I1, Mask J1, Mask I2, Mask J2) {
  if ((I1 & I2) || (J1 & J2)) return 0;
  // zeta^I1 zetabar^J1 zeta^I2 zetabar^J2 -> move zeta^I2 past zetabar^J1
  int s = ((popcount(J1) * popcount(I2)) % 2) ? -1 : 1;
  return s * merge_sign(I1, I2) * merge_sign(J1, J2);
}

std::vector<WedgeTerm> wedge_table(int n, int p1, int q1, int p2, int q2) {
  std::vector<WedgeTerm> out;
  if (p1 + p2 > n || q1 + q2 > n) return out;
  auto c1 = components(n, p1, q1);
  auto c2 = components(n, p2, q2);
  for (size_t a = 0; a < c1.size(); ++a) {
    for (size_t b = 0; b < c2.size(); ++b) {
      int s = wedge_sign(c1[a].first, c1[a].second, c2[b].first, c2[b].second);
      if (s == 0) continue;
      int co = comp_index(n, p1 + p2, q1 + q2, c1[a].first | c2[b].first, c1[a].second | c2[b].second);
      out.push_back({static_cast<int>(a), static_cast<int>(b), co, static_cast<double>(s)});
    }
  }
  return out;
}

ConstForm kahler_form(int n) {
  ConstForm w;
  w.p = 1;
  w.q = 1;
  w.c.assign(ncomp(n, 1, 1), cd(0.0));
  for (int j = 0; j < n; ++j) w.c[comp_index(n, 1, 1, 1u << j, 1u << j)] = cd(0.0, 0.5);
  return w;
}

ConstForm const_wedge(int n, const ConstForm& a, const ConstForm& b) {
  ConstForm out;
  out.p = a.p + b.p;
  out.q = a.q + b.q;
  out.c.assign(ncomp(n, out.p, out.q), cd(0.0));
  for (const auto& t : wedge_table(n, a.p, a.q, b.p, b.q)) out.c[t.cout] += t.sign * a.c[t.c1] * b.c[t.c2];
  return out;
}

ConstForm const_power(int n, const ConstForm& a, int k) {
  ConstForm out;
  out.c = {cd(1.0)};
  for (int i = 0; i < k; ++i) out = const_wedge(n, out, a);
  return out;
}

int hodge_sign(int D, Mask A) {
  Mask full = (D >= 32) ? ~0u : ((1u << D) - 1u);
  return merge_sign(A, full & ~A);
}

namespace {

using RealVec = std::map<Mask, cd>;

RealVec expand(int n, Mask I, Mask J) {
  RealVec acc;
  acc[0] = cd(1.0);
  auto mult = [](const RealVec& v, const std::vector<std::pair<Mask, cd>>& one) {
    RealVec out;
    for (const auto& [m, c] : v) {
      for (const auto& [b, w] : one) {
        int s = merge_sign(m, b);
        if (s == 0) continue;
        out[m | b] += static_cast<double>(s) * c * w;
      }
    }
    return out;
  };
  for (int j = 0; j < n; ++j)
    if (I & (1u << j)) acc = mult(acc, {{1u << (2 * j), cd(1.0)}, {1u << (2 * j + 1), cd(0.0, 1.0)}});
  for (int j = 0; j < n; ++j)
    if (J & (1u << j)) acc = mult(acc, {{1u << (2 * j), cd(1.0)}, {1u << (2 * j + 1), cd(0.0, -1.0)}});
  return acc;
}

struct ChangeOfBasis {
  Eigen::MatrixXcd full;     // columns: zeta basis (all bidegrees), rows: real basis
  Eigen::MatrixXcd inverse;
  std::map<std::pair<int, int>, int> offset;
};

const ChangeOfBasis& change_of_basis(int n) {
  static std::mutex mu;
  static std::map<int, ChangeOfBasis> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const int dim = 1 << (2 * n);
  ChangeOfBasis cb;
  cb.full = Eigen::MatrixXcd::Zero(dim, dim);
  int col = 0;
  for (int p = 0; p <= n; ++p) {
    for (int q = 0; q <= n; ++q) {
      cb.offset[{p, q}] = col;
      for (const auto& [I, J] : components(n, p, q)) {
        for (const auto& [m, c] : expand(n, I, J)) cb.full(static_cast<int>(m), col) += c;
        ++col;
      }
    }
  }
  cb.inverse = cb.full.inverse();
  return cache.emplace(n, std::move(cb)).first->second;
}

}  // namespace

Eigen::MatrixXcd zeta_to_real(int n, int p, int q) {
  const auto& cb = change_of_basis(n);
  return cb.full.middleCols(cb.offset.at({p, q}), ncomp(n, p, q));
}

Eigen::MatrixXcd real_to_zeta(int n, int p, int q) {
  const auto& cb = change_of_basis(n);
  return cb.inverse.middleRows(cb.offset.at({p, q}), ncomp(n, p, q));
}

cd top_factor(int n) {
  Mask all = (1u << n) - 1u;
  RealVec v = expand(n, all, all);
  Mask top = (1u << (2 * n)) - 1u;
  return v.count(top) ? v.at(top) : cd(0.0);
}

}  // namespace folhe::forms
