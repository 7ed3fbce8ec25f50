#include "doctest.h"
#include "oracle.hpp"

#include "folhe/bundles.hpp"
#include "folhe/kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace folhe;

namespace {

constexpr double kPi = std::numbers::pi;

// exp of a band-limited Hermitian field with pointwise norm about amp
BasicField random_metric(const ModelPtr& m, int r, std::mt19937_64& rng, double amp, const BundleSpec* spec = nullptr) {
  BasicField x = random_field(m, 0, 0, r, rng, true, 1);
  if (spec) apply_class_mask(*spec, x);
  x *= cd(amp / std::max(1e-300, grid_max_abs(to_grid(x))));
  return hermitian_function(x, [](double t) { return std::exp(t); });
}

BundleSpec ext_bundle(const ModelPtr& m) {
  // nontrivial extension of L(0) by L(0) plus a gauge-trivial term
  ExtensionTerm e{0, 1, {0, 0, 0}, 0, cd(0.3, 0.1)};
  HiddenTerm h{0, 1, {1, -1, 0}, cd(0.2, 0.0)};
  return make_bundle(m, {line1(m, 0), line1(m, 0)}, {e}, {h}, "ext");
}

}  // namespace

TEST_CASE("curvature of trivial metric and scalar conformal change") {
  auto m = Model::product(1, 1, 8);
  auto spec = make_bundle(m, {line1(m, 1)});
  auto id = BasicField::identity(m, 1);
  auto f0 = curvature_std(spec).f11;
  CHECK((curvature(spec, id) - f0).max_coeff() < 1e-14);

  // f = e^phi: F = F_0 + delbar del phi; top coefficient of delbar del phi = -(1/4) Lap phi
  BasicField phi(m, 0, 0, 1);
  phi.at(m->modes().find({1, 1, 0}), 0, 0, 0) = phi.at(m->modes().find({-1, -1, 0}), 0, 0, 0) = 0.05;
  phi.at(m->modes().find({0, 1, 0}), 0, 0, 0) = cd(0.0, 0.1);
  phi.at(m->modes().find({0, -1, 0}), 0, 0, 0) = cd(0.0, -0.1);
  auto f = hermitian_function(phi, [](double t) { return std::exp(t); });
  auto F = curvature(spec, f);
  auto u = [&](const std::vector<double>& x) { return oracle::eval_at(phi, x); };
  for (auto x0 : {std::vector<double>{0.1, 0.2, 0.0}, std::vector<double>{0.77, 0.31, 0.0}}) {
    cd lap = oracle::fd_second(u, x0, 0, 1e-3) + oracle::fd_second(u, x0, 1, 1e-3);
    cd got = oracle::eval_at(F, x0) - f0.zero_mode()(0, 0);
    CHECK(std::abs(got - (-0.25) * lap) < 1e-6);
  }
  // K = K_0 + P(phi)
  auto K = mean_curvature(spec, f);
  auto expect = mean_curvature_std(spec) + p_operator(phi);
  CHECK((K - expect).max_coeff() < 1e-9);
}

TEST_CASE("curvature formula agrees with the full curvature of the new connection") {
  std::mt19937_64 rng(41);
  auto m = Model::product(2, 1, 5);
  ExtensionTerm e{0, 1, {0, 0, 0, 0, 0}, 1, cd(0.2, 0.0)};
  auto spec = make_bundle(m, {line(m, {1, 0}), line(m, {1, 0})}, {e});
  auto f = random_metric(m, 2, rng, 0.2);
  Connection c0 = chern_connection(spec);
  // A_h = A_0 + f^{-1} del_0 f, computed directly
  auto finv = hermitian_function(f, [](double t) { return 1.0 / t; });
  BasicField extra = wedge(finv, del_E(c0, f));
  BasicField a10 = c0.a10 + extra;
  auto ref = curvature_std(spec).f11 - (delbar(c0.a10) + del(c0.a01) + wedge(c0.a10, c0.a01) + wedge(c0.a01, c0.a10));
  BasicField f11 = ref + delbar(a10) + del(c0.a01) + wedge(a10, c0.a01) + wedge(c0.a01, a10);
  BasicField f20 = del(a10) + wedge(a10, a10);
  auto F = curvature(spec, f);
  // truncation of f^{-1} del f limits agreement to the spectral tail
  CHECK((F - f11).max_coeff() < 1e-8);
  CHECK(f20.max_coeff() < 1e-8);
  CHECK(curvature_std(spec).f02.max_coeff() < 1e-14);
}

TEST_CASE("degree: closed forms, metric independence, cross-check") {
  std::mt19937_64 rng(43);
  auto m = Model::product(1, 1, 8);
  CHECK(std::abs(degree(make_bundle(m, {line1(m, 0)}))) < 1e-14);
  for (int c : {-2, 1, 3}) {
    auto s = make_bundle(m, {line1(m, c)});
    CHECK(std::abs(degree(s) - c) < 1e-12);
    CHECK(std::abs(degree(s) - degree_closed_form(s)) < 1e-12);
  }
  auto spec = direct_sum({make_bundle(m, {line1(m, 1)}), ext_bundle(m)});
  CHECK(spec.rank() == 3);
  double d0 = degree(spec);
  CHECK(std::abs(d0 - 1.0) < 1e-12);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    BasicField f = random_metric(m, 3, rng, 1.0, &spec);
    if (t % 2 == 0) {
      // conformal change on top
      BasicField psi = random_field(m, 0, 0, 1, rng, true, 2);
      BasicField e = hermitian_function(psi, [](double x) { return std::exp(x); });
      GridField fg = to_grid(f), eg = to_grid(e);
      for (size_t pt = 0; pt < fg.points; ++pt) fg.mat(pt, 0) *= eg.mat(pt, 0)(0, 0);
      f = from_grid(fg, m);
      f.hermitize();
    }
    worst = std::max(worst, std::abs(degree(spec, f) - d0));
  }
  CHECK(worst < 1e-10);

  // Chern-Weil route through the mean curvature
  auto f = random_metric(m, 3, rng, 0.5, &spec);
  auto K = mean_curvature(spec, f);
  double via_K = m->volume() * K.trace().zero_mode()(0, 0).real() / (2.0 * kPi);
  CHECK(std::abs(via_K - d0) < 1e-10);

  auto m2 = Model::product(2, 1, 2);
  auto s2 = make_bundle(m2, {line(m2, {1, 1}), line(m2, {2, -1})});
  CHECK(std::abs(degree(s2) - 3.0) < 1e-12);
}

TEST_CASE("mean curvature and Einstein factor") {
  std::mt19937_64 rng(47);
  auto m = Model::product(1, 1, 8);
  CHECK(mean_curvature(make_bundle(m, {line1(m, 0)}), BasicField::identity(m, 1)).max_coeff() == 0.0);
  auto l1 = make_bundle(m, {line1(m, 1)});
  auto K = mean_curvature_std(l1);
  CHECK(std::abs(K.zero_mode()(0, 0) - cd(2 * kPi)) < 1e-13);
  CHECK(std::abs(einstein_factor(l1) - 2 * kPi) < 1e-12);
  CHECK(einstein_factor(make_bundle(m, {line1(m, 0)})) == 0.0);
  auto l11 = make_bundle(m, {line1(m, 1), line1(m, 1)});
  CHECK(std::abs(einstein_factor(l11) - einstein_factor(l1)) < 1e-13);

  // K_h is h-self-adjoint: f K_h Hermitian
  auto spec = ext_bundle(m);
  auto f = random_metric(m, 2, rng, 0.3);
  auto Kh = mean_curvature(spec, f);
  auto fK = wedge(f, Kh);
  CHECK(fK.hermitian_residual() < 1e-12 * std::max(1.0, fK.max_coeff()) + 1e-10);
}

TEST_CASE("Bogomolov integrand") {
  std::mt19937_64 rng(53);
  auto m = Model::product(2, 1, 3);
  auto id2 = BasicField::identity(m, 2);
  auto pf = make_bundle(m, {line(m, {1, 0}), line(m, {1, 0})});
  CHECK(std::abs(bogomolov_integral(pf, id2)) < 1e-10);
  auto triv = make_bundle(m, {line(m, {0, 0}), line(m, {0, 0})});
  CHECK(std::abs(bogomolov_integral(triv, id2)) < 1e-12);
  // split L(a) + L(b): -int (x_a - x_b)^2 = -2 d0 d1 / Vol with d = a - b
  auto split = make_bundle(m, {line(m, {1, -1}), line(m, {0, 0})});
  const double closed = -2.0 * (1.0) * (-1.0) / m->volume();
  CHECK(std::abs(bogomolov_integral(split, id2) - closed) < 1e-9);
  auto split3 = make_bundle(m, {line(m, {2, 1}), line(m, {-1, 1})});
  CHECK(std::abs(bogomolov_integral(split3, id2) - (-2.0 * 3.0 * 0.0)) < 1e-9);
  auto f = random_metric(m, 2, rng, 0.3, &split);
  CHECK(std::abs(bogomolov_integral(split, f) - closed) < 1e-9);
  CHECK_THROWS(bogomolov_integral(make_bundle(Model::product(1, 1, 2), {line1(Model::product(1, 1, 2), 0)}),
                                  BasicField::identity(Model::product(1, 1, 2), 1)));
}

TEST_CASE("dual, tensor, direct sum") {
  auto m = Model::product(1, 1, 6);
  auto e = ext_bundle(m);
  auto l = make_bundle(m, {line1(m, 2, 0.25, 0.0)});
  auto big = direct_sum({e, l});
  CHECK(std::abs(degree(dual(big)) + degree(big)) < 1e-12);
  CHECK(std::abs(degree(direct_sum({l, l})) - 2 * degree(l)) < 1e-12);
  auto t = tensor(big, direct_sum({l, make_bundle(m, {line1(m, -1)})}));
  double expect = 2 * degree(big) + big.rank() * (degree(l) - 1.0);
  CHECK(std::abs(degree(t) - expect) < 1e-10);
  // dual keeps the extension strictly upper triangular and integrable structure
  auto de = dual(e);
  for (size_t k = 0; k < de.b01.nmodes(); ++k) CHECK(std::abs(de.b01.at(k, 0, 1, 0)) == 0.0);
  CHECK_THROWS(make_bundle(m, {line1(m, 0), line1(m, 1)}, {ExtensionTerm{0, 1, {0, 0, 0}, 0, 1.0}}));
  CHECK_THROWS(make_bundle(m, {line1(m, 0), line1(m, 0)}, {ExtensionTerm{1, 0, {0, 0, 0}, 0, 1.0}}));
}

TEST_CASE("hidden extension on n = 2 stays integrable") {
  auto m = Model::product(2, 1, 3);
  HiddenTerm h{0, 1, {1, 0, 0, 1, 0}, cd(0.3, 0.0)};
  auto spec = make_bundle(m, {line(m, {1, -1}), line(m, {1, -1}), line(m, {-2, 2})}, {}, {h});
  auto parts = curvature_std(spec);
  CHECK(parts.f02.max_coeff() < 1e-12);
  CHECK(parts.f20.max_coeff() < 1e-12);
  CHECK(std::abs(degree(spec)) < 1e-12);
  CHECK(spec.b01.max_coeff() > 0.1);
  ExtensionTerm bad1{0, 1, {0, 0, 1, 0, 0}, 0, cd(0.3, 0.0)};
  CHECK_THROWS(make_bundle(m, {line(m, {0, 0}), line(m, {0, 0})}, {bad1}));
}
