#include "doctest.h"

#include "folhe/he_solver.hpp"
#include "folhe/moduli.hpp"
#include "folhe/stability.hpp"

#include <random>

using namespace folhe;

namespace {

const SymVec kXi = parse_symvec("1,sqrt2,sqrt3");

SymVec add(const SymVec& a, const IntVec& m) {
  SymVec out = a;
  for (size_t i = 0; i < a.size(); ++i) out[i] += SymReal(m[i]);
  return out;
}

}  // namespace

TEST_CASE("gauge and basic gauge equivalence") {
  const SymVec y = parse_symvec("1/3,sqrt2,0");
  CHECK(gauge_equivalent(y, y));
  CHECK(basic_gauge_equivalent(y, y, kXi));
  const SymVec e1 = add(y, {1, 0, 0});
  CHECK(gauge_equivalent(y, e1));
  CHECK_FALSE(basic_gauge_equivalent(y, e1, kXi));
  const SymVec regular = parse_symvec("0,0,1");
  CHECK(basic_gauge_equivalent(y, e1, regular));
  CHECK_FALSE(basic_gauge_equivalent(y, add(y, {0, 0, 1}), regular));
  CHECK_FALSE(gauge_equivalent(y, parse_symvec("1/3,0,0")));

  CHECK(same_transverse_structure(y, y, kXi));
  CHECK_FALSE(same_transverse_structure(y, e1, kXi));
  SymVec ortho = y;
  ortho[0] += kXi[1];
  ortho[1] -= kXi[0];
  CHECK(same_transverse_structure(y, ortho, kXi));
}

TEST_CASE("equivalence relations on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(-2, 2);
  const std::vector<SymVec> xis = {kXi, parse_symvec("0,0,1"), parse_symvec("1,sqrt2,0")};
  for (int trial = 0; trial < 200; ++trial) {
    const SymVec& xi = xis[trial % xis.size()];
    SymVec a = {SymReal(Rational(small(rng), 3)), SymReal::sqrt_of(2) * SymReal(small(rng)), SymReal(small(rng))};
    auto rnd = [&] { return IntVec{small(rng), small(rng), small(rng)}; };
    // mix lattice shifts, basic shifts and non-integral shifts
    SymVec b = add(a, rnd());
    SymVec c = trial % 3 == 0 ? add(b, rnd()) : add(b, IntVec{0, 0, small(rng)});
    if (trial % 5 == 0) c[0] += SymReal(Rational(1, 2));
    for (auto rel : {+[](const SymVec& p, const SymVec& q, const SymVec&) { return gauge_equivalent(p, q); },
                     +[](const SymVec& p, const SymVec& q, const SymVec& x) { return basic_gauge_equivalent(p, q, x); },
                     +[](const SymVec& p, const SymVec& q, const SymVec& x) {
                       return same_transverse_structure(p, q, x);
                     }}) {
      CHECK(rel(a, a, xi));
      CHECK(rel(a, b, xi) == rel(b, a, xi));
      if (rel(a, b, xi) && rel(b, c, xi)) CHECK(rel(a, c, xi));
    }
  }
}

TEST_CASE("non-compactness certificate") {
  SymVec v;
  REQUIRE(exact_unit_normal(kXi, v));
  CHECK(dot(v, kXi).is_zero());
  CHECK(dot(v, v) == SymReal(1));

  auto c = noncompactness_certificate(kXi, 10);
  CHECK(c.status == "certificate");
  CHECK(c.basic_lattice.empty());
  CHECK(c.same_class);
  CHECK(c.no_convergent_subsequence);
  CHECK(c.min_pairwise_distance2 == 1);
  REQUIRE(c.sequence.size() == 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j) CHECK(c.pairwise_distance2[i][j] == Rational((i - j) * (i - j)));
  for (double f : c.curvature_norm) CHECK(f == 0.0);

  CHECK(noncompactness_certificate(kXi, 1).status == "trivial");
  auto reg = noncompactness_certificate(parse_symvec("0,0,1"), 10);
  CHECK(reg.status == "compact");
  CHECK(reg.basic_lattice.size() == 2);
  CHECK(noncompactness_certificate(parse_symvec("1,sqrt2,0"), 10).status == "rejected");
}

TEST_CASE("flat line bundles are polystable and keep the flat metric") {
  ModelParams p;
  p.d = 3;
  p.n = 1;
  p.m = 1;
  p.xi = {kXi};
  p.cutoff = 4;
  auto m = Model::create(p);
  SymVec v;
  REQUIRE(exact_unit_normal(kXi, v));
  auto spec = flat_line_bundle(m, v);
  CHECK(std::abs(degree(spec)) < 1e-12);
  CHECK(stability_verdict(spec).verdict == "stable");
  auto path = trace_path(spec);
  CHECK(path.verdict == Verdict::Converged);
  CHECK((path.f_final - BasicField::identity(m, 1)).max_coeff() < 1e-12);
  CHECK_THROWS_AS(flat_line_bundle(m, parse_symvec("1,0,0")), std::invalid_argument);
}
