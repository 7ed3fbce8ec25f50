#include "doctest.h"
#include "oracle.hpp"

#include "folhe/kernel.hpp"
#include "folhe/model.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

using namespace folhe;

namespace {

constexpr double kPi = std::numbers::pi;

ModelPtr irrational_t3() {
  ModelParams p;
  p.d = 3;
  p.n = 1;
  p.m = 1;
  p.xi = {parse_symvec("1,sqrt2,sqrt3")};
  p.cutoff = 4;
  return Model::create(p);
}

// Quadrature pairing on a uniform ambient grid of the transverse torus of a
// product model; exact for band-limited inputs below the grid Nyquist limit.
cd quadrature_pairing(const BasicField& a, const BasicField& b, int pts) {
  const auto& model = a.model();
  const int n = model->n();
  const int d2 = 2 * n;
  std::vector<int> idx(d2, 0);
  cd s = 0.0;
  long total = 0;
  for (;;) {
    std::vector<double> x(model->d(), 0.0);
    for (int i = 0; i < d2; ++i) x[i] = static_cast<double>(idx[i]) / pts;
    for (int c = 0; c < a.ncomp(); ++c)
      for (int i = 0; i < a.rank(); ++i)
        for (int j = 0; j < a.rank(); ++j)
          s += oracle::eval_at(a, x, c, i, j) * std::conj(oracle::eval_at(b, x, c, i, j));
    ++total;
    int i = d2 - 1;
    while (i >= 0 && idx[i] == pts - 1) {
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++idx[i];
  }
  return s / static_cast<double>(total) * forms::weight(a.p(), a.q()) * model->volume();
}

}  // namespace

TEST_CASE("admissibility") {
  auto irr = irrational_t3();
  CHECK(irr->is_admissible({0, 0, 0}));
  CHECK_FALSE(irr->is_admissible({1, 0, 0}));
  CHECK(irr->d_eff() == 0);
  CHECK(irr->modes().size() == 1);

  auto prod = Model::product(1, 1, 4);
  CHECK(prod->is_admissible({3, -2, 0}));
  CHECK_FALSE(prod->is_admissible({3, -2, 1}));

  ModelParams p;
  p.d = 3;
  p.n = 1;
  p.m = 1;
  p.xi = {parse_symvec("1,1,sqrt2")};
  p.cutoff = 3;
  auto partial = Model::create(p);
  CHECK(partial->d_eff() == 1);
  CHECK(partial->is_admissible({1, -1, 0}));
  CHECK_FALSE(partial->is_admissible({1, 1, 0}));
}

TEST_CASE("mode set invariants") {
  auto m = Model::product(1, 1, 8);
  const auto& ms = m->modes();
  CHECK(ms.size() == 17u * 17u);
  for (size_t k = 0; k < ms.size(); ++k) {
    CHECK(ms.neg[ms.neg[k]] == k);
    CHECK(m->is_admissible(ms.k[k]));
  }
  CHECK(ms.symbol[ms.zero] == 0.0);
}

TEST_CASE("volume and Kahler identities") {
  for (int n : {1, 2}) {
    auto m = Model::product(n, 1, 2);
    CHECK(m->volume() == doctest::Approx(1.0).epsilon(1e-14));
    auto w = BasicField::from_const_form(m, forms::kahler_form(n));
    BasicField lw = contract(w);
    CHECK(std::abs(lw.zero_mode()(0, 0) - cd(n)) < 1e-14);
    auto top = forms::const_power(n, forms::kahler_form(n), n);
    double nfact = n == 1 ? 1.0 : 2.0;
    for (auto& c : top.c) c /= nfact;
    auto vol_form = BasicField::from_const_form(m, top);
    CHECK(std::abs(integrate(vol_form) - cd(m->volume())) < 1e-14);
    auto one = BasicField::identity(m, 1);
    CHECK(contract(one).max_coeff() == 0.0);
  }
}

TEST_CASE("dolbeault agrees with finite differences") {
  auto m = Model::product(1, 1, 6);
  const IntVec k = {2, -1, 0};
  auto f = BasicField::scalar_mode(m, k, 1.0);
  auto [df, dbf] = dolbeault(f);
  long idx = m->modes().find(k);
  REQUIRE(idx >= 0);
  // zeta = dx + i dy: del f = (f_x - i f_y)/2 zeta
  const cd expect = cd(0.0, 2.0 * kPi) * cd(k[0], -k[1]) * 0.5;
  CHECK(std::abs(df.at(idx, 0, 0, 0) - expect) < 1e-12);
  for (size_t j = 0; j < df.nmodes(); ++j)
    if (static_cast<long>(j) != idx) CHECK(std::abs(df.at(j, 0, 0, 0)) == 0.0);

  auto u = [&](const std::vector<double>& x) { return oracle::eval_at(f, x); };
  const std::vector<double> x0 = {0.137, 0.411, 0.0};
  double prev_err = 0.0;
  for (double h : {0.02, 0.01, 0.005}) {
    cd fx = oracle::fd_first(u, x0, 0, h), fy = oracle::fd_first(u, x0, 1, h);
    cd fd_del = 0.5 * (fx - cd(0, 1) * fy), fd_delbar = 0.5 * (fx + cd(0, 1) * fy);
    double err = std::abs(fd_del - oracle::eval_at(df, x0)) + std::abs(fd_delbar - oracle::eval_at(dbf, x0));
    CHECK(err < 1e-2);
    if (prev_err > 0.0) CHECK(prev_err / err > 12.0);  // fourth order
    prev_err = err;
  }
}

TEST_CASE("constants are closed, squares vanish") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2}) {
    auto m = Model::product(n, 1, n == 1 ? 8 : 3);
    auto c = BasicField::constant(m, Eigen::MatrixXcd::Random(2, 2));
    CHECK(del(c).max_coeff() == 0.0);
    CHECK(delbar(c).max_coeff() == 0.0);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        auto a = random_field(m, p, q, 2, rng);
        double scale = a.max_coeff() * std::pow(2 * kPi * m->cutoff(), 2);
        if (q + 2 <= n) CHECK(delbar(delbar(a)).max_coeff() < 1e-13 * scale);
        if (p + 2 <= n) CHECK(del(del(a)).max_coeff() < 1e-13 * scale);
        auto lhs = delbar(del(a));
        auto rhs = del(delbar(a));
        CHECK((lhs + rhs).max_coeff() < 1e-13 * scale);
      }
  }
}

TEST_CASE("delbar squared is zero on the tilted model") {
  ModelParams p;
  p.d = 5;
  p.n = 2;
  p.m = 1;
  p.xi = {parse_symvec("1,0,sqrt2,0,1")};
  p.cutoff = 2;
  auto m = Model::create(p);
  CHECK(m->d_eff() == 3);
  std::mt19937_64 rng(3);
  auto a = random_field(m, 0, 0, 1, rng);
  CHECK(delbar(delbar(a)).max_coeff() < 1e-12 * a.max_coeff());
}

TEST_CASE("Lefschetz and contraction are adjoint under quadrature pairing") {
  std::mt19937_64 rng(11);
  auto m = Model::product(1, 1, 8);
  for (int trial = 0; trial < 3; ++trial) {
    auto a = random_field(m, 1, 1, 2, rng);
    auto b = random_field(m, 0, 0, 2, rng);
    cd lhs = quadrature_pairing(a, lefschetz(b), 16);
    cd rhs = quadrature_pairing(contract(a), b, 16);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
    CHECK(std::abs(a.inner(lefschetz(b)) - lhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  auto m2 = Model::product(2, 1, 2);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      auto a = random_field(m2, p + 1, q + 1, 1, rng, false, 1);
      auto b = random_field(m2, p, q, 1, rng, false, 1);
      cd lhs = a.inner(lefschetz(b));
      cd rhs = contract(a).inner(b);
      CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("wedge: identity, mode addition, grid oracle") {
  std::mt19937_64 rng(5);
  auto m = Model::product(1, 1, 8);
  auto a = random_field(m, 1, 0, 2, rng);
  auto one = BasicField::identity(m, 2);
  CHECK((wedge(a, one) - a).max_coeff() < 1e-13);
  CHECK((wedge(one, a) - a).max_coeff() < 1e-13);

  auto e1 = BasicField::scalar_mode(m, {2, 3, 0}, 1.0);
  auto e2 = BasicField::scalar_mode(m, {-5, 4, 0}, 1.0);
  auto prod = wedge(e1, e2);
  long idx = m->modes().find({-3, 7, 0});
  CHECK(std::abs(prod.at(idx, 0, 0, 0) - 1.0) < 1e-13);
  prod.at(idx, 0, 0, 0) = 0.0;
  CHECK(prod.max_coeff() < 1e-13);

  auto b = random_field(m, 0, 1, 2, rng);
  auto ab = wedge(a, b);
  double diff = 0.0;
  const int pts = 2 * m->modes().grid_dims[0];
  for (int i = 0; i < pts; i += 3)
    for (int j = 0; j < pts; j += 5) {
      std::vector<double> x = {static_cast<double>(i) / pts, static_cast<double>(j) / pts, 0.0};
      Eigen::Matrix2cd av, bv, abv;
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          av(r, s) = oracle::eval_at(a, x, 0, r, s);
          bv(r, s) = oracle::eval_at(b, x, 0, r, s);
          abv(r, s) = oracle::eval_at(ab, x, 0, r, s);
        }
      diff = std::max(diff, (abv - av * bv).cwiseAbs().maxCoeff());
    }
  CHECK(diff < 1e-10);
  CHECK_THROWS(wedge(a, random_field(m, 0, 0, 3, rng)));
}

TEST_CASE("integration and basic Stokes") {
  std::mt19937_64 rng(17);
  auto m = Model::product(1, 1, 8);
  auto e = BasicField::scalar_mode(m, {1, 0, 0}, 1.0);
  CHECK(std::abs(integrate_function(e)) == 0.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a01 = random_field(m, 0, 1, 1, rng);
    auto a10 = random_field(m, 1, 0, 1, rng);
    auto d = del(a01) + delbar(a10);
    worst = std::max(worst, std::abs(integrate(d)));
  }
  CHECK(worst < 1e-14);
  CHECK_THROWS(integrate(random_field(m, 1, 0, 1, rng)));
}

TEST_CASE("P operator: kernel, symbol, adjoint") {
  auto m = Model::product(1, 1, 8);
  auto c = BasicField::constant(m, Eigen::MatrixXcd::Constant(1, 1, 3.0));
  CHECK(p_operator(c).max_coeff() == 0.0);
  const auto& ms = m->modes();
  for (size_t k = 0; k < ms.size(); ++k) {
    if (k == ms.zero) continue;
    CHECK(ms.symbol[k] > 0.0);
  }
  // symbol equals half the Laplacian eigenvalue: FD oracle
  const IntVec k = {1, 2, 0};
  auto f = BasicField::scalar_mode(m, k, 1.0);
  auto pf = p_operator(f);
  long idx = ms.find(k);
  double lam = pf.at(idx, 0, 0, 0).real();
  CHECK(std::abs(pf.at(idx, 0, 0, 0).imag()) < 1e-12);
  auto u = [&](const std::vector<double>& x) { return oracle::eval_at(f, x); };
  const std::vector<double> x0 = {0.3, 0.1, 0.0};
  cd lap = oracle::fd_second(u, x0, 0, 1e-3) + oracle::fd_second(u, x0, 1, 1e-3);
  CHECK(std::abs(-0.5 * lap / u(x0) - lam) < 1e-6 * lam);

  std::mt19937_64 rng(23);
  for (int n : {1, 2}) {
    auto mn = Model::product(n, 1, n == 1 ? 8 : 3);
    for (int trial = 0; trial < 5; ++trial) {
      auto a = random_field(mn, 0, 0, 1, rng, true);
      auto b = random_field(mn, 0, 0, 1, rng, true);
      cd lhs = p_operator(a).inner(b);
      cd rhs = a.inner(p_adjoint(b));
      CHECK(std::abs(lhs - rhs) < 1e-11 * std::abs(lhs));
    }
  }
}

TEST_CASE("poisson solve") {
  auto m = Model::product(1, 1, 8);
  auto zero = BasicField(m, 0, 0, 1);
  CHECK(poisson_solve(zero).max_coeff() == 0.0);
  const IntVec k = {3, -1, 0};
  auto g = BasicField::scalar_mode(m, k, cd(0.7, -0.2));
  auto phi = poisson_solve(g);
  long idx = m->modes().find(k);
  CHECK(std::abs(phi.at(idx, 0, 0, 0) - cd(0.7, -0.2) / m->modes().symbol[idx]) < 1e-15);
  CHECK((p_operator(phi) - g).max_coeff() < 1e-13);
  auto bad = BasicField::constant(m, Eigen::MatrixXcd::Constant(1, 1, 1.0));
  CHECK_THROWS_WITH_AS(poisson_solve(bad), doctest::Contains("not in Im(P)"), std::domain_error);
}

TEST_CASE("Hodge star") {
  std::mt19937_64 rng(29);
  auto m = Model::product(2, 1, 2);
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 2; ++q) {
      auto a = random_field(m, p, q, 1, rng, false, 1);
      auto ss = hodge_star_B(hodge_star_B(a));
      double sign = ((p + q) % 2) ? -1.0 : 1.0;  // ** = (-1)^{k(2n-k)}
      CHECK((ss - a * cd(sign)).max_coeff() < 1e-13);
    }
  auto one = BasicField::identity(m, 1);
  auto vol = hodge_star_B(one);
  CHECK(std::abs(integrate(vol) - cd(m->volume())) < 1e-14);
}

TEST_CASE("Gauduchon checks") {
  for (int n : {1, 2, 3}) CHECK(gauduchon_check(Model::product(n, 1, 1)) == 0.0);
  auto m1 = Model::product(1, 1, 4);
  std::mt19937_64 rng(31);
  CHECK(gauduchon_residual(random_field(m1, 0, 0, 1, rng, true)) < 1e-12);

  // n = 2: top coefficient of del delbar(e^psi) ^ omega is -(i/8) Lap e^psi
  auto m = Model::product(2, 1, 4);
  BasicField psi(m, 0, 0, 1);
  long i1 = m->modes().find({1, 0, 0, 0, 0}), i2 = m->modes().find({-1, 0, 0, 0, 0});
  long j1 = m->modes().find({0, 0, 1, 1, 0}), j2 = m->modes().find({0, 0, -1, -1, 0});
  psi.at(i1, 0, 0, 0) = psi.at(i2, 0, 0, 0) = 0.1;
  psi.at(j1, 0, 0, 0) = psi.at(j2, 0, 0, 0) = 0.05;
  auto form = gauduchon_form(psi);
  CHECK(gauduchon_residual(psi) > 1e-3);
  auto u = [&](const std::vector<double>& x) {
    return std::exp(2.0 * (0.1 * std::cos(2 * kPi * x[0]) + 0.05 * std::cos(2 * kPi * (x[2] + x[3]))));
  };
  auto uc = [&](const std::vector<double>& x) { return cd(u(x)); };
  const std::vector<double> x0 = {0.21, 0.7, 0.33, 0.05, 0.0};
  cd lap = 0.0;
  for (int ax = 0; ax < 4; ++ax) lap += oracle::fd_second(uc, x0, ax, 1e-3);
  cd expect = cd(0.0, -1.0 / 8.0) * lap;
  CHECK(std::abs(oracle::eval_at(form, x0) - expect) < 1e-4 * std::abs(expect));
}

TEST_CASE("kernel suite runtime at N=8, d=5") {
  auto t0 = std::chrono::steady_clock::now();
  auto m = Model::product(2, 1, 8);
  std::mt19937_64 rng(1);
  auto a = random_field(m, 0, 0, 1, rng, true);
  auto b = random_field(m, 0, 0, 1, rng, true);
  cd lhs = p_operator(a).inner(b), rhs = a.inner(p_adjoint(b));
  CHECK(std::abs(lhs - rhs) < 1e-11 * std::abs(lhs));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 30.0);
}
