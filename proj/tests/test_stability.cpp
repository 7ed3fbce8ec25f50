#include "doctest.h"

#include "folhe/examples.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/kernel.hpp"
#include "folhe/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace folhe;

namespace {

constexpr double kPi = std::numbers::pi;

BundleSpec sum_of(const ModelPtr& m, const std::vector<int>& cs) {
  std::vector<LineFactor> f;
  for (int c : cs) f.push_back(line1(m, c));
  return make_bundle(m, f);
}

BasicField const_projection(const ModelPtr& m, int r, const std::vector<int>& idx) {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(r, r);
  for (int i : idx) p(i, i) = 1.0;
  return BasicField::constant(m, p);
}

}  // namespace

TEST_CASE("subbundle slopes by projection Chern-Weil") {
  auto m = Model::product(1, 1, 6);
  auto split = sum_of(m, {1, 0});
  CHECK(std::abs(subbundle_slope(split, BasicField(), BasicField::identity(m, 2)) - 0.5) < 1e-12);
  CHECK(std::abs(subbundle_slope(split, BasicField(), const_projection(m, 2, {0})) - 1.0) < 1e-9);
  CHECK(std::abs(subbundle_slope(split, BasicField(), const_projection(m, 2, {1}))) < 1e-9);

  // diagonal metric change: pi stays h-orthogonal and the degree is unchanged
  std::mt19937_64 rng(5);
  BasicField a = random_field(m, 0, 0, 1, rng, true, 1);
  BasicField b = random_field(m, 0, 0, 1, rng, true, 1);
  BasicField logf(m, 0, 0, 2);
  for (size_t k = 0; k < logf.nmodes(); ++k) {
    logf.at(k, 0, 0, 0) = a.at(k, 0, 0, 0) * cd(0.3);
    logf.at(k, 0, 1, 1) = b.at(k, 0, 0, 0) * cd(0.3);
  }
  BasicField f = hermitian_function(logf, [](double t) { return std::exp(t); });
  CHECK(std::abs(subbundle_slope(split, f, const_projection(m, 2, {0})) - 1.0) < 1e-9);

  int rk = 0;
  CHECK_THROWS_AS(subbundle_degree(split, BasicField(), BasicField::identity(m, 2) * cd(0.3), &rk), std::domain_error);
}

TEST_CASE("non-holomorphic projection loses exactly |delbar pi|^2") {
  auto m = Model::product(1, 1, 6);
  const double y0 = 0.25, y1 = 0.4;
  auto e = make_bundle(m, {line1(m, 0, y0, 0.0), line1(m, 0, 0.0, y1)});
  const Eigen::MatrixXcd& U = m->theta_to_holo();
  const cd beta0 = cd(0.0, 2 * kPi) * (y0 * std::conj(U(0, 0)));
  const cd beta1 = cd(0.0, 2 * kPi) * (y1 * std::conj(U(1, 0)));
  for (double th : {0.2, 0.7}) {
    const double c = std::cos(th), s = std::sin(th);
    Eigen::MatrixXcd p(2, 2);
    p << c * c, c * s, c * s, s * s;
    BasicField pi = BasicField::constant(m, p);
    // [b, pi] has off-diagonal entries +-(beta0 - beta1) cs, each of weight 2
    const double norm2 = 2.0 * 2.0 * std::norm(beta0 - beta1) * c * c * s * s * m->volume();
    const double expect = -norm2 / (2.0 * kPi);
    CHECK(std::abs(subbundle_slope(e, BasicField(), pi) - expect) < 1e-10);
    CHECK(subbundle_slope(e, BasicField(), pi) < -1e-3);
  }
  CHECK(std::abs(subbundle_slope(e, BasicField(), const_projection(m, 2, {0}))) < 1e-12);
}

TEST_CASE("Chern-Weil degree of every holomorphic candidate equals the closed form") {
  auto m = Model::product(1, 1, 6);
  for (const auto& c : battery(m)) {
    INFO(c.name);
    for (const auto& s : enumerate_subobjects(c.spec)) {
      if (!s.holomorphic) continue;
      CHECK(std::abs(s.cw_degree - s.degree) < 1e-9);
      CHECK(s.weak_holomorphy < 1e-12);
    }
  }
  auto ext = extension_bundle(m, 0);
  auto subs = enumerate_subobjects(ext);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].holomorphic);
  CHECK(subs[0].origin == "extension kernel");
  CHECK_FALSE(subs[1].holomorphic);
  CHECK(subs[1].weak_holomorphy > 0.1);
}

TEST_CASE("stability verdicts") {
  auto m = Model::product(1, 1, 6);
  CHECK(stability_verdict(sum_of(m, {1, 0})).verdict == "unstable");
  CHECK(stability_verdict(extension_bundle(m, 0)).verdict == "semistable-not-polystable");
  CHECK(stability_verdict(sum_of(m, {0, 0})).verdict == "polystable-not-stable");
  CHECK(stability_verdict(sum_of(m, {3})).verdict == "stable");
  auto hid = stability_verdict(hidden_extension_bundle(m));
  CHECK(hid.verdict == "polystable-not-stable");
  CHECK(hid.end_dim == 4);
  auto ext = stability_verdict(extension_bundle(m, 0));
  CHECK(ext.end_dim == 2);
  CHECK(ext.end_dim_graded == 4);
  CHECK(ext.kernel_gap > 0.1);

  // distinct holonomies: H^1 of the Hom bundle vanishes, the extension splits
  ExtensionTerm t{0, 1, IntVec(3, 0), 0, cd(0.5, 0.0)};
  auto twisted = make_bundle(m, {line1(m, 0, 0.25, 0.0), line1(m, 0, 0.0, 0.0)}, {t});
  auto tv = stability_verdict(twisted);
  CHECK(tv.verdict == "polystable-not-stable");
  CHECK(tv.end_dim == 2);

  auto three = direct_sum({extension_bundle(m, 0), sum_of(m, {0})});
  CHECK(stability_verdict(three).verdict == "semistable-not-polystable");

  for (const auto& c : battery(m)) {
    INFO(c.name);
    CHECK(stability_verdict(c.spec).verdict == c.expected_stability);
  }
  auto m2 = Model::product(2, 1, 3);
  CHECK(stability_verdict(make_bundle(m2, {line(m2, {0, 0}), line(m2, {1, 0})})).verdict == "UNSUPPORTED");
}

TEST_CASE("holomorphic sections") {
  auto m = Model::product(1, 1, 6);
  auto neg = vanishing_check(sum_of(m, {-1}));
  REQUIRE(neg.classes.size() == 1);
  CHECK(neg.classes[0].dim == 0);
  CHECK(neg.ok);

  auto triv = vanishing_check(sum_of(m, {0}), BasicField::identity(m, 1));
  CHECK(triv.total_dim == 1);
  CHECK(triv.classes[0].method == "fourier-svd");
  CHECK(triv.classes[0].max_covariant_derivative < 1e-14);
  CHECK(triv.ok);

  auto hol = vanishing_check(make_bundle(m, {line1(m, 0, 0.25, 0.0)}));
  CHECK(hol.total_dim == 0);
  CHECK(hol.classes[0].gap > 0.5);

  CHECK(vanishing_check(sum_of(m, {2})).total_dim == 2);
  CHECK(vanishing_check(extension_bundle(m, 0)).total_dim == 1);

  // Hom(E, E') = E^* (x) E' for semistable E, E' with mu(E) > mu(E')
  auto hom = tensor(dual(sum_of(m, {1, 1})), sum_of(m, {0}));
  auto hv = vanishing_check(hom);
  CHECK(hv.total_dim == 0);
  CHECK(hv.ok);

  // degree-0 sections of a polystable bundle are parallel for the HE metric
  auto hid = hidden_extension_bundle(m);
  auto path = trace_path(hid);
  REQUIRE(path.verdict == Verdict::Converged);
  const BasicField& f = path.limit_metric.empty() ? path.f_final : path.limit_metric;
  auto hv2 = vanishing_check(path.init.spec, f);
  CHECK(hv2.total_dim == 2);
  MESSAGE("max |nabla s| = " << hv2.classes[0].max_covariant_derivative);
  CHECK(hv2.ok);
}

TEST_CASE("Harder-Narasimhan and Jordan-Hoelder filtrations") {
  auto m = Model::product(1, 1, 4);
  std::vector<int> cs = {0, 1, 2};
  int variants = 0;
  do {
    auto hn = harder_narasimhan(sum_of(m, cs));
    REQUIRE(hn.supported);
    REQUIRE(hn.steps.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(hn.steps[i].rank == i + 1);
      CHECK(hn.steps[i].quotient_slope == doctest::Approx(2.0 - i));
    }
    ++variants;
  } while (std::next_permutation(cs.begin(), cs.end()));
  CHECK(variants == 6);

  auto ss = harder_narasimhan(sum_of(m, {1, 1}));
  REQUIRE(ss.steps.size() == 1);
  CHECK(ss.steps[0].rank == 2);

  auto mixed = harder_narasimhan(direct_sum({extension_bundle(m, 0), sum_of(m, {1})}));
  REQUIRE(mixed.steps.size() == 2);
  CHECK(mixed.steps[0].factors == std::vector<int>{2});
  CHECK(mixed.steps[1].quotient_slope == doctest::Approx(0.0));

  auto jh = jordan_holder(sum_of(m, {0, 0}));
  REQUIRE(jh.steps.size() == 2);
  for (const auto& s : jh.steps) CHECK(s.quotient_slope == 0.0);
  auto jext = jordan_holder(extension_bundle(m, 0));
  REQUIRE(jext.steps.size() == 2);
  CHECK(jext.steps[0].factors == std::vector<int>{0});
  CHECK_FALSE(jordan_holder(sum_of(m, {1, 0})).supported);
}
