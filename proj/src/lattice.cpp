#include "folhe/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <limits>
#include <stdexcept>

namespace folhe {

namespace {

BigInt lcm_big(const BigInt& a, const BigInt& b) {
  return a / boost::multiprecision::gcd(a, b) * b;
}

long long norm2(const IntVec& v) {
  long long s = 0;
  for (long long x : v) s += x * x;
  return s;
}

}  // namespace

std::vector<IntVec> integer_kernel(const std::vector<std::vector<Rational>>& rows, int d) {
  // Work on the transpose: d rows of length r, augmented with the identity.
  const size_t r = rows.size();
  std::vector<std::vector<BigInt>> a(d, std::vector<BigInt>(r));
  std::vector<std::vector<BigInt>> u(d, std::vector<BigInt>(d, 0));
  for (size_t i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != d) throw std::invalid_argument("integer_kernel: row length");
    BigInt den = 1;
    for (const auto& q : rows[i]) den = lcm_big(den, boost::multiprecision::denominator(q));
    for (int j = 0; j < d; ++j) a[j][i] = boost::multiprecision::numerator(rows[i][j] * Rational(den));
  }
  for (int j = 0; j < d; ++j) u[j][j] = 1;

  auto row_op = [&](int dst, int src, const BigInt& mult) {  // dst -= mult*src
    for (size_t c = 0; c < r; ++c) a[dst][c] -= mult * a[src][c];
    for (int c = 0; c < d; ++c) u[dst][c] -= mult * u[src][c];
  };

  int pivot_row = 0;
  for (size_t col = 0; col < r && pivot_row < d; ++col) {
    // Euclid on column entries below pivot_row until a single nonzero remains.
    for (;;) {
      int best = -1;
      for (int i = pivot_row; i < d; ++i) {
        if (a[i][col] != 0 && (best < 0 || abs(a[i][col]) < abs(a[best][col]))) best = i;
      }
      if (best < 0) break;
      std::swap(a[pivot_row], a[best]);
      std::swap(u[pivot_row], u[best]);
      bool done = true;
      for (int i = pivot_row + 1; i < d; ++i) {
        if (a[i][col] != 0) {
          BigInt q = a[i][col] / a[pivot_row][col];
          row_op(i, pivot_row, q);
          if (a[i][col] != 0) done = false;
        }
      }
      if (done) {
        ++pivot_row;
        break;
      }
    }
  }
  std::vector<IntVec> basis;
  for (int i = pivot_row; i < d; ++i) {
    IntVec v(d);
    for (int c = 0; c < d; ++c) {
      if (abs(u[i][c]) > BigInt(std::numeric_limits<long long>::max() / 4))
        throw std::overflow_error("integer_kernel: coefficient overflow");
      v[c] = static_cast<long long>(u[i][c]);
    }
    basis.push_back(v);
  }
  reduce_basis(basis);
  return basis;
}

std::vector<std::vector<Rational>> relation_rows(const std::vector<SymVec>& xi_rows) {
  std::vector<std::vector<Rational>> out;
  for (const auto& row : xi_rows) {
    std::set<Monomial> monos;
    for (const auto& x : row)
      for (const auto& [m, q] : x.terms()) monos.insert(m);
    for (const auto& m : monos) {
      std::vector<Rational> eq;
      for (const auto& x : row) {
        auto it = x.terms().find(m);
        eq.push_back(it == x.terms().end() ? Rational(0) : it->second);
      }
      out.push_back(std::move(eq));
    }
  }
  return out;
}

bool annihilates(const IntVec& k, const std::vector<SymVec>& xi_rows) {
  for (const auto& row : xi_rows) {
    if (row.size() != k.size()) throw std::invalid_argument("annihilates: size mismatch");
    SymReal s;
    for (size_t j = 0; j < k.size(); ++j)
      if (k[j] != 0) s += SymReal(k[j]) * row[j];
    if (!s.is_zero()) return false;
  }
  return true;
}

void reduce_basis(std::vector<IntVec>& basis) {
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 1000) {
    changed = false;
    std::sort(basis.begin(), basis.end(), [](const IntVec& x, const IntVec& y) {
      long long nx = norm2(x), ny = norm2(y);
      return nx != ny ? nx < ny : x > y;
    });
    for (size_t i = 0; i < basis.size(); ++i) {
      for (size_t j = 0; j < basis.size(); ++j) {
        if (i == j) continue;
        long long nj = norm2(basis[j]);
        if (nj == 0) continue;
        long long ip = std::inner_product(basis[i].begin(), basis[i].end(), basis[j].begin(), 0LL);
        long long q = static_cast<long long>(std::llround(static_cast<double>(ip) / static_cast<double>(nj)));
        if (q != 0 && 2 * std::llabs(ip) > nj) {
          for (size_t c = 0; c < basis[i].size(); ++c) basis[i][c] -= q * basis[j][c];
          changed = true;
        }
      }
    }
  }
  // Canonical sign: first nonzero entry positive.
  for (auto& v : basis) {
    for (long long x : v) {
      if (x != 0) {
        if (x < 0)
          for (auto& y : v) y = -y;
        break;
      }
    }
  }
  std::sort(basis.begin(), basis.end(), [](const IntVec& x, const IntVec& y) { return x > y; });
}

}  // namespace folhe
