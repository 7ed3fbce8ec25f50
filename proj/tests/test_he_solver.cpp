#include "doctest.h"

#include "folhe/examples.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/kernel.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace folhe;

namespace {

constexpr double kPi = std::numbers::pi;

BasicField diag_metric(const ModelPtr& m, const std::vector<BasicField>& logs) {
  const int r = static_cast<int>(logs.size());
  BasicField x(m, 0, 0, r);
  for (size_t k = 0; k < x.nmodes(); ++k)
    for (int i = 0; i < r; ++i) x.at(k, 0, i, i) = logs[i].at(k, 0, 0, 0);
  return hermitian_function(x, [](double t) { return std::exp(t); });
}

BasicField smooth_scalar(const ModelPtr& m, double a, double b) {
  BasicField phi(m, 0, 0, 1);
  phi.at(m->modes().find({1, 0, 0}), 0, 0, 0) = phi.at(m->modes().find({-1, 0, 0}), 0, 0, 0) = a;
  phi.at(m->modes().find({0, 1, 0}), 0, 0, 0) = cd(0.0, b);
  phi.at(m->modes().find({0, -1, 0}), 0, 0, 0) = cd(0.0, -b);
  return phi;
}

}  // namespace

TEST_CASE("residual of the perturbed equation") {
  auto m = Model::product(1, 1, 8);
  auto flat = make_bundle(m, {line1(m, 0)});
  ContinuityProblem pf(flat);
  for (double eps : {1.0, 0.3, 1e-4}) CHECK(pf.residual(BasicField::identity(m, 1), eps).max_coeff() == 0.0);

  // line bundle with f = e^phi: L = K^0 + P(phi) + eps phi, and K^0 = 0
  auto l1 = make_bundle(m, {line1(m, 1)});
  ContinuityProblem pl(l1);
  CHECK(pl.k0().max_coeff() < 1e-13);
  BasicField phi = smooth_scalar(m, 0.2, 0.1);
  BasicField f = hermitian_function(phi, [](double t) { return std::exp(t); });
  for (double eps : {1.0, 0.25}) {
    BasicField expect = p_operator(phi) + phi * cd(eps);
    CHECK((pl.residual(f, eps) - expect).max_coeff() < 1e-9);
  }
}

TEST_CASE("initial metric") {
  auto m = Model::product(1, 1, 8);
  auto flat = initial_metric(make_bundle(m, {line1(m, 0)}));
  CHECK(flat.phi.max_coeff() == 0.0);
  CHECK((flat.f1 - BasicField::identity(m, 1)).max_coeff() < 1e-15);

  auto l2 = initial_metric(make_bundle(m, {line1(m, 2)}));
  CHECK((l2.f1 - BasicField::identity(m, 1)).max_coeff() < 1e-13);
  CHECK(l2.residual < 1e-12);

  // split L1 + L0: K^0 = diag(pi, -pi), f1 = diag(e^{-pi}, e^{pi})
  auto sp = initial_metric(make_bundle(m, {line1(m, 1), line1(m, 0)}));
  auto z = sp.f1.zero_mode();
  CHECK(std::abs(z(0, 0) - std::exp(-kPi)) < 1e-12 * std::exp(kPi));
  CHECK(std::abs(z(1, 1) - std::exp(kPi)) < 1e-12 * std::exp(kPi));
  CHECK(std::abs(z(0, 1)) == 0.0);
  CHECK(sp.residual < 1e-9);

  auto hid = initial_metric(hidden_extension_bundle(m));
  CHECK(hid.trace_residual < 1e-12);
  CHECK(hid.residual < 1e-9);
  CHECK((hid.gauge - BasicField::identity(m, 2)).max_coeff() > 1e-3);
}

TEST_CASE("linearization matches finite differences") {
  std::mt19937_64 rng(71);
  auto m = Model::product(1, 1, 8);
  for (const auto& spec : {hidden_extension_bundle(m), extension_bundle(m, 0)}) {
    auto init = initial_metric(spec);
    ContinuityProblem p(init.spec);
    const BasicField& f = init.f1;
    const double eps = 0.7;
    BasicField eta = random_field(m, 0, 0, 2, rng, true, 1) * cd(0.1);
    BasicField T = p.linearization(f, eps, eta);
    BasicField sh = p.exp_metric(p.log_metric(f) * cd(-0.5));
    auto lhat = [&](const BasicField& g) { return wedge(sh, wedge(wedge(g, p.residual(g, eps)), sh)); };
    std::vector<double> err;
    for (double t : {1e-2, 1e-3}) {
      BasicField fd = (lhat(p.update(f, eta * cd(t), false)) - lhat(p.update(f, eta * cd(-t), false))) * cd(0.5 / t);
      err.push_back((fd - T).max_coeff());
    }
    // central differences: error falls like t^2
    CHECK(err[1] < err[0] / 50.0);
    CHECK(err[1] < 1e-6 * T.max_coeff());
  }
}

TEST_CASE("Newton: exact solution, diagonal one-step, quadratic convergence") {
  auto m = Model::product(1, 1, 8);
  SolverOptions opt;
  // at an exact solution the correction vanishes
  auto l1 = make_bundle(m, {line1(m, 1)});
  ContinuityProblem pl(l1);
  auto st = pl.newton_step(BasicField::identity(m, 1), 0.5);
  CHECK((st.f - BasicField::identity(m, 1)).max_coeff() < 1e-14);

  // split bundle, diagonal metric: the solution is constant, log f = -K^0 / eps
  auto split = make_bundle(m, {line1(m, 1), line1(m, 0)});
  ContinuityProblem ps(split);
  const double eps = 0.5;
  BasicField phi = smooth_scalar(m, 0.05, 0.03) + BasicField::identity(m, 1) * cd(-kPi / eps);
  BasicField f0 = diag_metric(m, {phi, phi * cd(-1.0)});
  auto sol = ps.solve(f0, eps, opt);
  REQUIRE(sol.ok);
  auto lf = ps.log_metric(sol.f);
  CHECK(std::abs(lf.zero_mode()(0, 0) - cd(-kPi / eps)) < 1e-10);
  CHECK(std::abs(lf.zero_mode()(1, 1) - cd(kPi / eps)) < 1e-10);
  lf.at(m->modes().zero, 0, 0, 0) = lf.at(m->modes().zero, 0, 1, 1) = 0.0;
  CHECK(lf.max_coeff() < 1e-10);

  // quadratic convergence on a non-diagonal rank-2 problem
  auto init = initial_metric(hidden_extension_bundle(m));
  ContinuityProblem ph(init.spec);
  auto res = ph.solve(init.f1, 0.5, opt);
  REQUIRE(res.ok);
  REQUIRE(res.residuals.size() >= 4);
  for (size_t j = 0; j < 2; ++j) {
    MESSAGE("newton residual " << res.residuals[j] << " -> " << res.residuals[j + 1]);
    CHECK(res.residuals[j + 1] / (res.residuals[j] * res.residuals[j]) < 10.0);
  }
  CHECK(res.residuals.back() <= opt.newton_atol);
}

TEST_CASE("continuity path battery with path invariants") {
  auto m = Model::product(1, 1, 6);
  int matched = 0, total = 0;
  for (const auto& c : battery(m)) {
    if (c.name == "Ext(L0,L0)") continue;  // slow semistable case; covered by the acceptance run
    auto p = trace_path(c.spec);
    ++total;
    INFO(c.name);
    CHECK(to_string(p.verdict) == c.expected_path);
    if (to_string(p.verdict) == c.expected_path) ++matched;
    for (const auto& h : p.history) {
      CHECK(h.m_bound_gap <= 1e-6);
      CHECK(h.estimate_gap <= 1e-8 * h.estimate_scale);
      CHECK(h.det_dev < 1e-9);
      CHECK(h.rho <= 1.0 + 1e-15);
      CHECK(h.max_rho_f >= 1.0 - 1e-8);
      CHECK(h.max_rho_f <= 1.0 + 1e-12);
      CHECK(h.min_f > 0.0);
    }
    if (p.verdict == Verdict::Blowup) {
      auto d = extract_destabilizer(p);
      CHECK(d.ok);
      CHECK(d.projection_residual < 1e-6);
      CHECK(d.adjoint_residual < 1e-6);
      CHECK(d.trace_deviation < 1e-6);
      CHECK(d.weak_holomorphy < 1e-4);
      CHECK(d.slope >= d.mu_E - 1e-6);
    }
  }
  CHECK(matched == total);
}

TEST_CASE("destabilizer of L1 + L0 and projection degrees") {
  auto m = Model::product(1, 1, 6);
  auto split = make_bundle(m, {line1(m, 1), line1(m, 0)});
  auto p = trace_path(split);
  REQUIRE(p.verdict == Verdict::Blowup);
  auto d = extract_destabilizer(p);
  CHECK(d.rank == 1);
  CHECK(std::abs(d.slope - 1.0) < 1e-9);
  CHECK(std::abs(d.mu_E - 0.5) < 1e-12);
  CHECK(std::abs(d.pi.zero_mode()(0, 0) - 1.0) < 1e-12);

  auto id = BasicField::identity(m, 2);
  CHECK(std::abs(projection_degree(split, id) - 1.0) < 1e-12);
  BasicField p0(m, 0, 0, 2);
  p0.at(m->modes().zero, 0, 0, 0) = 1.0;
  CHECK(std::abs(projection_degree(split, p0) - 1.0) < 1e-12);
  // the sub-line of the hidden extension has degree 0 even though delbar pi != 0
  auto hid = hidden_extension_bundle(m);
  CHECK(std::abs(projection_degree(hid, p0)) < 1e-12);
  Connection conn = chern_connection(hid);
  CHECK(delbar_E(conn, p0).max_coeff() > 1e-3);
}

TEST_CASE("gauge covariance under a constant unitary") {
  auto m = Model::product(1, 1, 6);
  auto spec = hidden_extension_bundle(m);
  const double th = 0.4;
  Eigen::MatrixXcd u(2, 2);
  u << std::cos(th), cd(0.0, std::sin(th)), cd(0.0, std::sin(th)), std::cos(th);
  BundleSpec rot = spec;
  rot.b01 = spec.b01.left_mul(u).right_mul(u.adjoint());
  auto a = trace_path(spec);
  auto b = trace_path(rot);
  REQUIRE(a.verdict == Verdict::Converged);
  REQUIRE(b.verdict == Verdict::Converged);
  BasicField conj = a.f_final.left_mul(u).right_mul(u.adjoint());
  CHECK((conj - b.f_final).max_coeff() < 1e-8);
}

TEST_CASE("Einstein factor from a solved metric") {
  auto m = Model::product(1, 1, 8);
  auto l1 = make_bundle(m, {line1(m, 1)});
  auto p = trace_path(l1);
  REQUIRE(p.verdict == Verdict::Converged);
  ContinuityProblem prob(p.init.spec);
  BasicField K = prob.he_defect(p.f_final) + BasicField::identity(m, 1) * cd(prob.gamma());
  CHECK(grid_max_abs(to_grid(K - BasicField::identity(m, 1) * cd(2 * kPi))) < 1e-8);
  CHECK(std::abs(prob.gamma() - einstein_factor(l1)) < 1e-12);
}
