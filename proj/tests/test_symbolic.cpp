#include "doctest.h"

#include "folhe/lattice.hpp"
#include "folhe/model.hpp"
#include "folhe/symbolic.hpp"

#include <cmath>
#include <random>

using namespace folhe;

TEST_CASE("SymReal parsing and arithmetic") {
  auto s2 = SymReal::parse("sqrt2");
  CHECK(s2 == SymReal::sqrt_of(2));
  CHECK(SymReal::parse("sqrt(8)") == SymReal(2) * s2);
  CHECK(s2 * s2 == SymReal(2));
  CHECK(s2 * SymReal::parse("sqrt3") == SymReal::parse("sqrt6"));
  CHECK(SymReal::parse("1/2 + 1/3") == SymReal(Rational(5, 6)));
  CHECK(SymReal::parse("0.25") == SymReal(Rational(1, 4)));
  CHECK(SymReal::parse("-(1 + sqrt2)") == -(SymReal(1) + s2));
  CHECK((SymReal(1) + s2 - s2 - SymReal(1)).is_zero());
  CHECK_FALSE((SymReal(1) + s2).is_zero());
  CHECK_FALSE((SymReal(3) - SymReal::parse("sqrt9") * s2).is_rational());
  CHECK(SymReal::parse("sqrt9").is_integer());
  CHECK(std::abs(SymReal::parse("2*pi - sqrt5").value() - (2 * M_PI - std::sqrt(5.0))) < 1e-15);
  CHECK(SymReal::parse("pi") * SymReal::parse("pi") == SymReal::parse("pi*pi"));
  CHECK_FALSE((SymReal::parse("pi") - SymReal(Rational(355, 113))).is_zero());

  SymReal r;
  CHECK(SymReal(Rational(9, 4)).try_sqrt(r));
  CHECK(r == SymReal(Rational(3, 2)));
  CHECK(SymReal(2).try_sqrt(r));
  CHECK(r == s2);
  CHECK_FALSE(SymReal(-1).try_sqrt(r));
  CHECK_FALSE((SymReal(1) + s2).try_sqrt(r));
  CHECK(s2.div(Rational(2)) == SymReal::parse("1/2*sqrt2"));

  for (const char* bad : {"", "sqrt", "1/0", "(1", "foo", "1 2", "sqrt(-2)"}) CHECK_THROWS(SymReal::parse(bad));
}

TEST_CASE("dot products decide orthogonality exactly") {
  auto xi = parse_symvec("1,sqrt2,sqrt3");
  CHECK(xi.size() == 3);
  CHECK(dot(xi, parse_symvec("0,0,0")).is_zero());
  CHECK_FALSE(dot(xi, parse_symvec("1,1,1")).is_zero());
  CHECK(dot(parse_symvec("sqrt2,sqrt3,1"), parse_symvec("sqrt3,-sqrt2,0")).is_zero());
  auto v = values(xi);
  CHECK(v[1] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("integer kernels and admissible lattices") {
  auto rank_of = [](const char* xi) {
    auto rows = relation_rows({parse_symvec(xi)});
    return integer_kernel(rows, 3).size();
  };
  CHECK(rank_of("1,sqrt2,sqrt3") == 0);
  CHECK(rank_of("1,sqrt2,0") == 1);
  CHECK(rank_of("0,0,1") == 2);
  CHECK(rank_of("1,2,3") == 2);
  CHECK(rank_of("1,1,sqrt2") == 1);
  CHECK(rank_of("sqrt2,sqrt8,pi") == 1);

  auto xi = parse_symvec("1,1,sqrt2");
  auto basis = integer_kernel(relation_rows({xi}), 3);
  REQUIRE(basis.size() == 1);
  CHECK(annihilates(basis[0], {xi}));
  CHECK(std::abs(basis[0][0]) == 1);
  CHECK(basis[0][0] == -basis[0][1]);
  CHECK(basis[0][2] == 0);

  // saturation: 2x + 4y = 0 has kernel generated by (2, -1), not (4, -2)
  std::vector<std::vector<Rational>> rows = {{Rational(2), Rational(4)}};
  auto k = integer_kernel(rows, 2);
  REQUIRE(k.size() == 1);
  CHECK(std::abs(k[0][0]) == 2);
  CHECK(std::abs(k[0][1]) == 1);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(-3, 3);
  auto rat = parse_symvec("1,2,3");
  for (int t = 0; t < 200; ++t) {
    IntVec kv = {u(rng), u(rng), u(rng)};
    bool expected = kv[0] + 2 * kv[1] + 3 * kv[2] == 0;
    CHECK(annihilates(kv, {rat}) == expected);
  }

  std::vector<IntVec> b = {{1, 0, 0}, {7, 1, 0}};
  reduce_basis(b);
  for (const auto& v : b)
    for (long long c : v) CHECK(std::abs(c) <= 1);
}

TEST_CASE("model mode sets respect the exact lattice") {
  ModelParams p;
  p.d = 3;
  p.n = 1;
  p.m = 1;
  p.xi = {parse_symvec("1,sqrt2,sqrt3")};
  p.cutoff = 4;
  auto m = Model::create(p);
  CHECK(m->d_eff() == 0);
  CHECK(m->modes().size() == 1);
  p.xi = {parse_symvec("1,1,0")};
  auto tilted = Model::create(p);
  CHECK(tilted->d_eff() == 2);
  for (const auto& k : tilted->modes().k) CHECK(k[0] + k[1] == 0);
}
