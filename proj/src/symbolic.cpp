#include "folhe/symbolic.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <limits>
#include <stdexcept>

namespace folhe {

namespace {

// radicand = square * squarefree
void split_square(long long x, long long& outside, long long& squarefree) {
  if (x <= 0) throw std::invalid_argument("sqrt of nonpositive integer");
  outside = 1;
  squarefree = 1;
  for (long long p = 2; p * p <= x; ++p) {
    while (x % (p * p) == 0) {
      outside *= p;
      x /= p * p;
    }
  }
  squarefree = x;
}

double atom_value(const std::string& name) {
  if (name == "pi") return std::numbers::pi;
  if (name == "e") return std::numbers::e;
  throw std::invalid_argument("unknown atom '" + name + "'");
}

class Parser {
 public:
  explicit Parser(std::string s) : s_(std::move(s)) {}

  SymReal parse() {
    SymReal v = expr();
    skip();
    if (pos_ != s_.size())
      throw std::invalid_argument("trailing characters in '" + s_ + "'");
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  SymReal expr() {
    SymReal acc;
    bool neg = false;
    if (eat('-')) neg = true;
    else eat('+');
    acc = neg ? -term() : term();
    for (;;) {
      if (eat('+')) acc += term();
      else if (eat('-')) acc -= term();
      else break;
    }
    return acc;
  }
  SymReal term() {
    SymReal v = factor();
    while (eat('*')) v = v * factor();
    return v;
  }
  SymReal number() {
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string ip = s_.substr(start, pos_ - start);
    Rational q(BigInt(ip.empty() ? std::string("0") : ip));
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      size_t fs = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string fp = s_.substr(fs, pos_ - fs);
      if (!fp.empty()) {
        BigInt den = 1;
        for (size_t i = 0; i < fp.size(); ++i) den *= 10;
        q += Rational(BigInt(fp), den);
      }
    }
    skip();
    if (pos_ < s_.size() && s_[pos_] == '/') {
      ++pos_;
      skip();
      size_t ds = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (ds == pos_) throw std::invalid_argument("bad rational in '" + s_ + "'");
      BigInt d(s_.substr(ds, pos_ - ds));
      if (d == 0) throw std::invalid_argument("zero denominator in '" + s_ + "'");
      q /= Rational(d);
    }
    return SymReal(q);
  }
  SymReal factor() {
    skip();
    if (pos_ >= s_.size()) throw std::invalid_argument("unexpected end of '" + s_ + "'");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      SymReal v = expr();
      if (!eat(')')) throw std::invalid_argument("missing ')' in '" + s_ + "'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (name == "sqrt") {
        bool paren = eat('(');
        skip();
        size_t ds = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (ds == pos_) throw std::invalid_argument("sqrt needs an integer in '" + s_ + "'");
        long long r = std::stoll(s_.substr(ds, pos_ - ds));
        if (paren && !eat(')')) throw std::invalid_argument("missing ')' in '" + s_ + "'");
        return SymReal::sqrt_of(r);
      }
      atom_value(name);  // validates
      return SymReal::atom(name);
    }
    throw std::invalid_argument("unexpected character in '" + s_ + "'");
  }

  std::string s_;
  size_t pos_ = 0;
};

}  // namespace

double Monomial::value() const {
  double v = std::sqrt(static_cast<double>(sqrt_part));
  for (const auto& [name, p] : powers) v *= std::pow(atom_value(name), p);
  return v;
}

std::string Monomial::str() const {
  std::string out;
  if (sqrt_part != 1) out = "sqrt" + std::to_string(sqrt_part);
  for (const auto& [name, p] : powers) {
    if (!out.empty()) out += "*";
    out += name;
    if (p != 1) out += "^" + std::to_string(p);
  }
  return out.empty() ? "1" : out;
}

SymReal::SymReal(long long v) {
  if (v != 0) terms_[Monomial{}] = Rational(v);
}

SymReal::SymReal(const Rational& q) {
  if (q != 0) terms_[Monomial{}] = q;
}

SymReal SymReal::parse(const std::string& text) { return Parser(text).parse(); }

SymReal SymReal::sqrt_of(long long radicand) {
  if (radicand == 0) return SymReal();
  long long outside = 1, sf = 1;
  split_square(radicand, outside, sf);
  SymReal r;
  Monomial m;
  m.sqrt_part = sf;
  r.terms_[m] = Rational(outside);
  return r;
}

SymReal SymReal::atom(const std::string& name) {
  SymReal r;
  Monomial m;
  m.powers[name] = 1;
  r.terms_[m] = Rational(1);
  return r;
}

bool SymReal::is_rational() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

Rational SymReal::rational_part() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Rational(0) : it->second;
}

bool SymReal::is_integer() const {
  if (!is_rational()) return false;
  Rational q = rational_part();
  return boost::multiprecision::denominator(q) == 1;
}

double SymReal::value() const {
  double v = 0.0;
  for (const auto& [m, q] : terms_) v += static_cast<double>(q) * m.value();
  return v;
}

std::string SymReal::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, q] : terms_) {
    Rational a = q;
    bool neg = a < 0;
    if (neg) a = -a;
    if (!first) out += neg ? " - " : " + ";
    else if (neg) out += "-";
    first = false;
    if (m.is_one()) {
      out += rational_str(a);
    } else if (a == 1) {
      out += m.str();
    } else {
      out += rational_str(a) + "*" + m.str();
    }
  }
  return out;
}

void SymReal::add_term(const Monomial& m, const Rational& q) {
  if (q == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, q);
  } else {
    it->second += q;
    if (it->second == 0) terms_.erase(it);
  }
}

SymReal SymReal::operator+(const SymReal& o) const {
  SymReal r = *this;
  for (const auto& [m, q] : o.terms_) r.add_term(m, q);
  return r;
}

SymReal SymReal::operator-() const {
  SymReal r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

SymReal SymReal::operator-(const SymReal& o) const { return *this + (-o); }

SymReal SymReal::operator*(const SymReal& o) const {
  SymReal r;
  for (const auto& [ma, qa] : terms_) {
    for (const auto& [mb, qb] : o.terms_) {
      // sqrt(a) sqrt(b) = g sqrt(ab / g^2)
      long long outside = 1, sf = 1;
      long long prod = ma.sqrt_part * mb.sqrt_part;
      split_square(prod, outside, sf);
      Monomial m;
      m.sqrt_part = sf;
      m.powers = ma.powers;
      for (const auto& [name, p] : mb.powers) {
        m.powers[name] += p;
        if (m.powers[name] == 0) m.powers.erase(name);
      }
      r.add_term(m, qa * qb * Rational(outside));
    }
  }
  return r;
}

bool SymReal::try_sqrt(SymReal& out) const {
  if (!is_rational()) return false;
  Rational q = rational_part();
  if (q < 0) return false;
  if (q == 0) {
    out = SymReal();
    return true;
  }
  // sqrt(p/d) = sqrt(p d) / d
  BigInt p = boost::multiprecision::numerator(q);
  BigInt d = boost::multiprecision::denominator(q);
  BigInt pd = p * d;
  if (pd > BigInt(std::numeric_limits<long long>::max())) return false;
  out = SymReal::sqrt_of(static_cast<long long>(pd)).div(Rational(d));
  return true;
}

SymReal SymReal::div(const Rational& q) const {
  if (q == 0) throw std::invalid_argument("division by zero");
  SymReal r = *this;
  for (auto& kv : r.terms_) kv.second /= q;
  return r;
}

SymReal dot(const SymVec& a, const SymVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  SymReal s;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

SymVec parse_symvec(const std::string& csv) {
  SymVec out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(SymReal::parse(item));
  return out;
}

std::vector<double> values(const SymVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.value());
  return out;
}

std::string rational_str(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace folhe
