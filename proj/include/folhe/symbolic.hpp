#pragma once
// Exact real numbers of the form sum_i q_i * m_i, where q_i is rational and
// m_i is a monomial in declared atoms (square roots of squarefree integers,
// pi, e). Distinct monomials are treated as linearly independent over Q.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <string>
#include <vector>

namespace folhe {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct Monomial {
  long long sqrt_part = 1;              // squarefree radicand
  std::map<std::string, int> powers;    // transcendental atoms

  bool is_one() const { return sqrt_part == 1 && powers.empty(); }
  double value() const;
  std::string str() const;
  auto operator<=>(const Monomial&) const = default;
};

class SymReal {
 public:
  SymReal() = default;
  SymReal(long long v);  // NOLINT(google-explicit-constructor)
  explicit SymReal(const Rational& q);

  static SymReal parse(const std::string& text);
  static SymReal sqrt_of(long long radicand);
  static SymReal atom(const std::string& name);

  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const;
  Rational rational_part() const;
  bool is_integer() const;
  double value() const;
  std::string str() const;

  // Coefficient map monomial -> rational (no zero entries).
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  SymReal operator+(const SymReal& o) const;
  SymReal operator-(const SymReal& o) const;
  SymReal operator-() const;
  SymReal operator*(const SymReal& o) const;
  SymReal& operator+=(const SymReal& o) { return *this = *this + o; }
  SymReal& operator-=(const SymReal& o) { return *this = *this - o; }
  bool operator==(const SymReal& o) const { return terms_ == o.terms_; }

  // Exact square root when the value is a nonnegative rational.
  bool try_sqrt(SymReal& out) const;
  // Exact division by a nonzero rational.
  SymReal div(const Rational& q) const;

 private:
  void add_term(const Monomial& m, const Rational& q);
  std::map<Monomial, Rational> terms_;
};

using SymVec = std::vector<SymReal>;

SymReal dot(const SymVec& a, const SymVec& b);
SymVec parse_symvec(const std::string& csv);
std::vector<double> values(const SymVec& v);
std::string rational_str(const Rational& q);

}  // namespace folhe
