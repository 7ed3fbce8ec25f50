#include "folhe/he_solver.hpp"

#include "folhe/kernel.hpp"
#include "folhe/krylov.hpp"
#include "folhe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace folhe {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

GridField scalar_grid(size_t points) {
  GridField g;
  g.r = 1;
  g.ncomp = 1;
  g.points = points;
  g.v.assign(points, cd(0.0));
  return g;
}

// [a, x] for a of degree one and x of degree dx, on the grid.
GridField grid_commutator(int n, const GridField& a, const GridField& x, int dx) {
  GridField out = grid_wedge(n, a, x);
  GridField rev = grid_wedge(n, x, a);
  return grid_sum(out, rev, (dx % 2) ? cd(1.0) : cd(-1.0));
}

bool all_zero(const GridField& g) {
  for (const auto& v : g.v)
    if (v != cd(0.0)) return false;
  return true;
}

}  // namespace

struct ContinuityProblem::PointEig {
  std::vector<Eigen::VectorXd> lam;
  std::vector<Eigen::MatrixXcd> vec;
};

namespace {

using PointEig = ContinuityProblem::PointEig;

PointEig eig_blocks(const GridField& g, const std::vector<std::vector<int>>& blocks) {
  PointEig out;
  out.lam.resize(g.points);
  out.vec.resize(g.points);
  const int r = g.r;
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(g.points); ++pt) {
    Eigen::MatrixXcd m = g.mat(pt, 0);
    Eigen::VectorXd lam(r);
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(r, r);
    for (const auto& b : blocks) {
      const int s = static_cast<int>(b.size());
      Eigen::MatrixXcd sub(s, s);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) sub(i, j) = 0.5 * (m(b[i], b[j]) + std::conj(m(b[j], b[i])));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sub);
      for (int i = 0; i < s; ++i) {
        lam(b[i]) = es.eigenvalues()(i);
        for (int j = 0; j < s; ++j) V(b[j], b[i]) = es.eigenvectors()(j, i);
      }
    }
    out.lam[pt] = lam;
    out.vec[pt] = V;
  }
  return out;
}

template <class Fn>
GridField eig_function(const PointEig& e, size_t points, int r, Fn fn) {
  GridField out;
  out.r = r;
  out.ncomp = 1;
  out.points = points;
  out.v.assign(points * static_cast<size_t>(r) * r, cd(0.0));
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(points); ++pt) {
    Eigen::VectorXcd d(r);
    for (int i = 0; i < r; ++i) d(i) = fn(e.lam[pt](i));
    out.mat(pt, 0) = e.vec[pt] * d.asDiagonal() * e.vec[pt].adjoint();
  }
  return out;
}

double frob(const GridField& g, size_t pt) {
  double s = 0.0;
  for (int c = 0; c < g.ncomp; ++c) s += g.mat(pt, c).squaredNorm() * forms::weight(g.p, g.q);
  return std::sqrt(s);
}

// Hermitian fields as real coordinate vectors (real and imaginary parts
// interleaved), so the Krylov solve stays on the real-linear Hermitian space.
Eigen::VectorXcd flatten(const BasicField& a) {
  const auto& d = a.data();
  Eigen::VectorXcd v(2 * static_cast<long>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) {
    v(2 * i) = d[i].real();
    v(2 * i + 1) = d[i].imag();
  }
  return v;
}

void unflatten(const Eigen::VectorXcd& v, BasicField& a) {
  auto& d = a.data();
  for (size_t i = 0; i < d.size(); ++i) d[i] = cd(v(2 * i).real(), v(2 * i + 1).real());
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "CONVERGED";
    case Verdict::Blowup: return "BLOWUP";
    default: return "INCONCLUSIVE";
  }
}

struct ContinuityProblem::Lin {
  BasicField f;
  double eps = 0.0;
  PointEig eig;
  GridField s, sinv, finv, logf, x10, ksh;
  BasicField defect;  // K_h - gamma
};

ContinuityProblem::ContinuityProblem(const BundleSpec& spec) : spec_(spec) {
  conn_ = chern_connection(spec_);
  f11_std_ = curvature_std(spec_).f11;
  gamma_ = einstein_factor(spec_);
  k0_ = contract(f11_std_) * cd(0.0, 1.0);
  k0_ -= BasicField::identity(spec_.model, spec_.rank()) * cd(gamma_);
  apply_class_mask(spec_, k0_);
  k0_.hermitize();
  a10_g_ = to_grid(conn_.a10);
  a01_g_ = to_grid(conn_.a01);
  if (all_zero(a10_g_) && all_zero(a01_g_)) {
    a10_g_ = GridField();
    a01_g_ = GridField();
  }
  const auto cls = spec_.classes();
  int ncls = 0;
  for (int c : cls) ncls = std::max(ncls, c + 1);
  blocks_.assign(ncls, {});
  for (int i = 0; i < spec_.rank(); ++i) blocks_[cls[i]].push_back(i);
}

GridField ContinuityProblem::metric_function(const GridField& f, double (*fn)(double)) const {
  return eig_function(eig_blocks(f, blocks_), f.points, f.r, [fn](double x) { return cd(fn(x)); });
}

BasicField ContinuityProblem::log_metric(const BasicField& f) const {
  BasicField out = from_grid(metric_function(to_grid(f), [](double x) {
    if (!(x > 0.0)) throw std::domain_error("metric is not positive definite on the grid");
    return std::log(x);
  }), spec_.model);
  apply_class_mask(spec_, out);
  out.hermitize();
  return out;
}

BasicField ContinuityProblem::exp_metric(const BasicField& x) const {
  BasicField out = from_grid(metric_function(to_grid(x), [](double t) { return std::exp(t); }), spec_.model);
  apply_class_mask(spec_, out);
  out.hermitize();
  return out;
}

ContinuityProblem::Lin ContinuityProblem::prepare(const BasicField& f, double eps) const {
  const int n = spec_.n();
  const int r = spec_.rank();
  const auto& model = spec_.model;
  Lin L;
  L.f = f;
  L.eps = eps;
  GridField fg = to_grid(f);
  L.eig = eig_blocks(fg, blocks_);
  for (const auto& lam : L.eig.lam)
    if (!(lam.minCoeff() > 0.0)) throw std::domain_error("metric is not positive definite on the grid");
  L.s = eig_function(L.eig, fg.points, r, [](double x) { return cd(std::sqrt(x)); });
  L.sinv = eig_function(L.eig, fg.points, r, [](double x) { return cd(1.0 / std::sqrt(x)); });
  L.finv = eig_function(L.eig, fg.points, r, [](double x) { return cd(1.0 / x); });
  L.logf = eig_function(L.eig, fg.points, r, [](double x) { return cd(std::log(x)); });

  GridField df = to_grid(del(f));
  if (!a10_g_.v.empty()) df = grid_sum(df, grid_commutator(n, a10_g_, fg, 0));
  L.x10 = grid_wedge(n, L.finv, df);
  BasicField x10 = from_grid(L.x10, model);
  GridField w = to_grid(delbar(x10));
  if (!a01_g_.v.empty()) w = grid_sum(w, grid_commutator(n, a01_g_, L.x10, 1));
  L.defect = k0_ + contract(from_grid(w, model)) * cd(0.0, 1.0);
  apply_class_mask(spec_, L.defect);
  L.ksh = grid_wedge(n, grid_wedge(n, L.s, to_grid(L.defect)), L.sinv);
  return L;
}

BasicField ContinuityProblem::he_defect(const BasicField& f) const { return prepare(f, 0.0).defect; }

BasicField ContinuityProblem::residual(const BasicField& f, double eps) const {
  Lin L = prepare(f, eps);
  BasicField out = L.defect + from_grid(L.logf, spec_.model) * cd(eps);
  apply_class_mask(spec_, out);
  return out;
}

BasicField ContinuityProblem::scaled_residual(const BasicField& f, double eps) const {
  Lin L = prepare(f, eps);
  BasicField out = from_grid(grid_sum(L.ksh, L.logf, cd(eps)), spec_.model);
  apply_class_mask(spec_, out);
  out.hermitize();
  return out;
}

BasicField ContinuityProblem::apply(const Lin& L, const BasicField& eta) const {
  const int n = spec_.n();
  const int r = spec_.rank();
  const auto& model = spec_.model;
  GridField eg = to_grid(eta);
  BasicField delta = from_grid(grid_wedge(n, grid_wedge(n, L.s, eg), L.s), model);
  apply_class_mask(spec_, delta);
  GridField dg = to_grid(delta);
  GridField etap = grid_wedge(n, grid_wedge(n, L.sinv, dg), L.sinv);

  GridField dd = to_grid(del(delta));
  if (!a10_g_.v.empty()) dd = grid_sum(dd, grid_commutator(n, a10_g_, dg, 0));
  GridField zg = grid_wedge(n, L.finv, grid_sum(dd, grid_wedge(n, dg, L.x10), cd(-1.0)));
  BasicField z = from_grid(zg, model);
  GridField w = to_grid(delbar(z));
  if (!a01_g_.v.empty()) w = grid_sum(w, grid_commutator(n, a01_g_, zg, 1));
  BasicField dk = contract(from_grid(w, model)) * cd(0.0, 1.0);
  apply_class_mask(spec_, dk);

  GridField t = grid_wedge(n, etap, L.ksh);
  t = grid_sum(t, grid_wedge(n, grid_wedge(n, L.s, to_grid(dk)), L.sinv));
  if (L.eps != 0.0) {
    const double eps = L.eps;
    FOLHE_PARALLEL_FOR
    for (long pt = 0; pt < static_cast<long>(t.points); ++pt) {
      const auto& V = L.eig.vec[pt];
      const auto& lam = L.eig.lam[pt];
      Eigen::MatrixXcd e = V.adjoint() * etap.mat(pt, 0) * V;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          const double li = lam(i), lj = lam(j);
          double gam;
          if (std::abs(li - lj) > 1e-10 * std::max(li, lj))
            gam = (std::log(li) - std::log(lj)) / (li - lj);
          else
            gam = 2.0 / (li + lj);
          e(i, j) *= eps * (std::log(lj) + li * gam);
        }
      t.mat(pt, 0) += V * e * V.adjoint();
    }
  }
  BasicField out = from_grid(t, model);
  apply_class_mask(spec_, out);
  return out;
}

BasicField ContinuityProblem::linearization(const BasicField& f, double eps, const BasicField& eta) const {
  return apply(prepare(f, eps), eta);
}

BasicField ContinuityProblem::congruence_update(const PointEig& ef, const GridField& s, const GridField& eg,
                                                bool normalize) const {
  const int n = spec_.n();
  const int r = spec_.rank();
  PointEig ee = eig_blocks(eg, blocks_);
  GridField ex = eig_function(ee, eg.points, r, [](double x) { return cd(std::exp(x)); });
  GridField out = grid_wedge(n, grid_wedge(n, s, ex), s);
  if (normalize) {
    // remove the band-limited part of log det, which is what the trace of
    // the discrete equation controls
    GridField ld = scalar_grid(out.points);
    for (size_t pt = 0; pt < out.points; ++pt) {
      double v = ee.lam[pt].sum();
      for (int i = 0; i < r; ++i) v += std::log(ef.lam[pt](i));
      ld.v[pt] = v;
    }
    BasicField ldm = from_grid(ld, spec_.model);
    ldm.hermitize();
    GridField ldg = to_grid(ldm);
    for (size_t pt = 0; pt < out.points; ++pt) out.mat(pt, 0) *= std::exp(-ldg.v[pt].real() / r);
  }
  BasicField res = from_grid(out, spec_.model);
  apply_class_mask(spec_, res);
  res.hermitize();
  return res;
}

BasicField ContinuityProblem::update(const BasicField& f, const BasicField& eta, bool normalize) const {
  const int r = spec_.rank();
  GridField fg = to_grid(f);
  PointEig ef = eig_blocks(fg, blocks_);
  GridField s = eig_function(ef, fg.points, r, [](double x) { return cd(std::sqrt(x)); });
  return congruence_update(ef, s, to_grid(eta), normalize);
}

// The operator only sees eta through delta = trunc(s eta s); stepping with
// s^{-1} delta s^{-1} drops the components it cannot see.
BasicField ContinuityProblem::step(const Lin& L, const BasicField& eta, double t) const {
  const int n = spec_.n();
  BasicField delta = from_grid(grid_wedge(n, grid_wedge(n, L.s, to_grid(eta)), L.s), spec_.model);
  apply_class_mask(spec_, delta);
  delta.hermitize();
  GridField vis = grid_wedge(n, grid_wedge(n, L.sinv, to_grid(delta)), L.sinv);
  for (auto& v : vis.v) v *= t;
  return congruence_update(L.eig, L.s, vis, true);
}

ContinuityProblem::NewtonResult ContinuityProblem::newton_step(const BasicField& f, double eps, double forcing) const {
  NewtonResult nr;
  Lin L = prepare(f, eps);
  BasicField R = from_grid(grid_sum(L.ksh, L.logf, cd(eps)), spec_.model);
  apply_class_mask(spec_, R);
  R.hermitize();
  nr.residuals.push_back(R.l2_norm());
  const auto& ms = spec_.model->modes();
  BasicField shape = R;
  const long blk = 2L * R.ncomp() * R.rank() * R.rank();
  LinearMap op = [&](const Eigen::VectorXcd& v) {
    unflatten(v, shape);
    shape.hermitize();
    BasicField out = apply(L, shape);
    out.hermitize();
    return flatten(out);
  };
  LinearMap pre = [&](const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out = v;
    for (size_t k = 0; k < ms.size(); ++k) out.segment(static_cast<long>(k) * blk, blk) /= (ms.symbol[k] + std::max(eps, 1e-3));
    return out;
  };
  Eigen::VectorXcd b = -flatten(R);
  GmresResult g = gmres(op, pre, b, forcing, 80, 1500);
  nr.krylov_iterations = g.iterations;
  BasicField eta = R;
  unflatten(g.x, eta);
  apply_class_mask(spec_, eta);
  eta.hermitize();
  nr.f = step(L, eta, 1.0);
  nr.iterations = 1;
  nr.ok = g.converged;
  nr.residuals.push_back(scaled_residual(nr.f, eps).l2_norm());
  if (!g.converged) nr.message = "krylov stagnation";
  return nr;
}

double ContinuityProblem::newton_atol(const SolverOptions& opt) const { return opt.newton_atol; }

ContinuityProblem::NewtonResult ContinuityProblem::solve(const BasicField& f0, double eps,
                                                         const SolverOptions& opt) const {
  NewtonResult nr;
  nr.f = f0;
  const double atol = newton_atol(opt);
  const auto& ms = spec_.model->modes();
  Lin L = prepare(f0, eps);
  auto scaled = [&](const Lin& lin) {
    BasicField R = from_grid(grid_sum(lin.ksh, lin.logf, cd(lin.eps)), spec_.model);
    apply_class_mask(spec_, R);
    R.hermitize();
    return R;
  };
  BasicField R = scaled(L);
  double rn = R.l2_norm();
  nr.residuals.push_back(rn);
  const long blk = 2L * R.ncomp() * R.rank() * R.rank();
  for (int it = 0; it < opt.max_newton; ++it) {
    if (rn <= atol) {
      nr.ok = true;
      return nr;
    }
    BasicField shape = R;
    LinearMap op = [&](const Eigen::VectorXcd& v) {
      unflatten(v, shape);
      shape.hermitize();
      BasicField out = apply(L, shape);
      out.hermitize();
      return flatten(out);
    };
    LinearMap pre = [&](const Eigen::VectorXcd& v) {
      Eigen::VectorXcd out = v;
      for (size_t k = 0; k < ms.size(); ++k)
        out.segment(static_cast<long>(k) * blk, blk) /= (ms.symbol[k] + std::max(eps, 1e-3));
      return out;
    };
    const double forcing = std::clamp(rn / std::max(1.0, k0_.l2_norm()), 1e-11, 1e-3);
    GmresResult g = gmres(op, pre, -flatten(R), forcing, opt.krylov_restart, opt.krylov_max);
    nr.krylov_iterations += g.iterations;
    ++nr.iterations;
    BasicField eta = R;
    unflatten(g.x, eta);
    apply_class_mask(spec_, eta);
    eta.hermitize();
    bool accepted = false;
    for (double t = 1.0; t > 1.0 / 128; t *= 0.5) {
      BasicField cand;
      Lin Lc;
      try {
        cand = step(L, eta, t);
        Lc = prepare(cand, eps);
      } catch (const std::domain_error&) {
        continue;
      }
      BasicField Rc = scaled(Lc);
      const double rc = Rc.l2_norm();
      if (std::isfinite(rc) && rc < (1.0 - 1e-4 * t) * rn) {
        nr.f = cand;
        L = std::move(Lc);
        R = Rc;
        rn = rc;
        accepted = true;
        break;
      }
    }
    nr.residuals.push_back(rn);
    if (!accepted) {
      nr.ok = rn <= 100.0 * atol;
      nr.message = nr.ok ? "stagnated at roundoff" : "line search failed";
      return nr;
    }
  }
  nr.ok = rn <= atol;
  if (!nr.ok) nr.message = "newton iteration limit";
  return nr;
}

StepRecord ContinuityProblem::diagnostics(const BasicField& f, double eps) const {
  const int r = spec_.rank();
  const auto& model = spec_.model;
  Lin L = prepare(f, eps);
  StepRecord rec;
  rec.eps = eps;
  BasicField R = from_grid(grid_sum(L.ksh, L.logf, cd(eps)), model);
  apply_class_mask(spec_, R);
  R.hermitize();
  rec.residual = R.l2_norm();
  const size_t np = L.logf.points;
  GridField k0g = to_grid(k0_);
  double k0max = 0.0;
  for (size_t pt = 0; pt < np; ++pt) k0max = std::max(k0max, frob(k0g, pt));
  GridField n2 = scalar_grid(np);
  double M = -1e300;
  rec.min_f = 1e300;
  for (size_t pt = 0; pt < np; ++pt) {
    rec.he_residual = std::max(rec.he_residual, frob(L.ksh, pt));
    const double lf = frob(L.logf, pt);
    rec.m_eps = std::max(rec.m_eps, lf);
    n2.v[pt] = lf * lf;
    const auto& lam = L.eig.lam[pt];
    M = std::max(M, std::log(lam.maxCoeff()));
    rec.min_f = std::min(rec.min_f, lam.minCoeff());
    double logdet = 0.0;
    for (int i = 0; i < r; ++i) logdet += std::log(lam(i));
    rec.det_dev = std::max(rec.det_dev, std::abs(std::exp(logdet) - 1.0));
  }
  rec.M_eps = M;
  rec.rho = std::exp(-M);
  for (size_t pt = 0; pt < np; ++pt)
    rec.max_rho_f = std::max(rec.max_rho_f, std::exp(std::log(L.eig.lam[pt].maxCoeff()) - M));
  rec.log_l2 = from_grid(L.logf, model).l2_norm();
  rec.m_bound_gap = rec.m_eps - k0max / eps;
  BasicField n2f = from_grid(n2, model);
  n2f.hermitize();
  GridField pn2 = to_grid(p_operator(n2f));
  rec.estimate_gap = -1e300;
  rec.estimate_scale = 1.0;
  for (size_t pt = 0; pt < np; ++pt) {
    const double rhs = frob(k0g, pt) * std::sqrt(n2.v[pt].real());
    const double lhs = 0.5 * pn2.v[pt].real() + eps * n2.v[pt].real();
    rec.estimate_gap = std::max(rec.estimate_gap, lhs - rhs);
    rec.estimate_scale = std::max(rec.estimate_scale, rhs);
  }
  return rec;
}

InitialData initial_metric(const BundleSpec& spec) {
  InitialData out;
  const auto& model = spec.model;
  const int r = spec.rank();
  const double gamma = einstein_factor(spec);
  BasicField k0 = mean_curvature_std(spec) - BasicField::identity(model, r) * cd(gamma);
  apply_class_mask(spec, k0);
  k0.hermitize();
  BasicField trk = k0.trace();
  // the mean vanishes by the degree identity; drop roundoff before the solve
  trk.at(model->modes().zero, 0, 0, 0) = 0.0;
  out.phi = poisson_solve(trk * cd(-1.0 / r));
  out.phi.hermitize();
  BasicField k1 = k0;
  {
    BasicField pphi = p_operator(out.phi);
    for (size_t k = 0; k < k1.nmodes(); ++k)
      for (int i = 0; i < r; ++i) k1.at(k, 0, i, i) += pphi.at(k, 0, 0, 0);
  }
  k1.hermitize();
  out.trace_residual = k1.trace().max_coeff();
  // g = exp((phi + K^0_{h_1}) / 2), f_1 = exp(-K^0_{h_1})
  BasicField half = k1;
  for (size_t k = 0; k < half.nmodes(); ++k)
    for (int i = 0; i < r; ++i) half.at(k, 0, i, i) += out.phi.at(k, 0, 0, 0);
  half *= 0.5;
  ContinuityProblem base(spec);
  out.gauge = base.exp_metric(half);
  out.spec = spec;
  out.spec.b01 = gauge_transform_b01(spec, out.gauge);
  out.spec.label = spec.label;
  out.f1 = base.exp_metric(k1 * cd(-1.0));
  ContinuityProblem shifted(out.spec);
  out.residual = shifted.residual(out.f1, 1.0).l2_norm();
  return out;
}

namespace {

double growth_slope(const std::vector<StepRecord>& h, int window) {
  const int n = static_cast<int>(h.size());
  if (n < window) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = n - window; i < n; ++i) {
    const double x = std::log(1.0 / h[i].eps);
    const double y = std::log(std::max(h[i].log_l2, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = window * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (window * sxy - sx * sy) / den;
}

}  // namespace

PathResult trace_path(const BundleSpec& spec, const SolverOptions& opt) {
  PathResult out;
  out.init = initial_metric(spec);
  ContinuityProblem prob(out.init.spec);
  double eps = opt.eps_start;
  auto first = prob.solve(out.init.f1, eps, opt);
  if (!first.ok) {
    out.message = "newton failed at eps = " + std::to_string(eps) + ": " + first.message;
    out.f_final = first.f;
    out.eps_final = eps;
    return out;
  }
  BasicField f = first.f;
  StepRecord rec = prob.diagnostics(f, eps);
  rec.newton_iters = first.iterations;
  rec.krylov_iters = first.krylov_iterations;
  out.history.push_back(rec);
  BasicField log_prev, log_cur = prob.log_metric(f);
  double eps_prev = 0.0;
  bool have_prev = false;

  while (eps > opt.eps_min * (1.0 + 1e-12)) {
    double ratio = opt.ratio;
    int halvings = 0;
    bool done = false;
    while (!done) {
      const double target = std::max(eps * ratio, opt.eps_min);
      // predictor: best of the previous metric and two extrapolations of log f
      std::vector<BasicField> cands{f, prob.exp_metric(log_cur * cd(eps / target))};
      if (have_prev)
        cands.push_back(prob.exp_metric(log_cur + (log_cur - log_prev) * cd((target - eps) / (eps - eps_prev))));
      BasicField guess = f;
      double best = 1e300;
      for (auto& c : cands) {
        try {
          c = prob.update(c, BasicField(c.model(), 0, 0, c.rank()));
          const double rn = prob.scaled_residual(c, target).l2_norm();
          if (std::isfinite(rn) && rn < best) {
            best = rn;
            guess = c;
          }
        } catch (const std::domain_error&) {
        }
      }
      auto nr = prob.solve(guess, target, opt);
      if (nr.ok) {
        log_prev = log_cur;
        eps_prev = eps;
        have_prev = true;
        f = nr.f;
        eps = target;
        log_cur = prob.log_metric(f);
        rec = prob.diagnostics(f, eps);
        rec.newton_iters = nr.iterations;
        rec.krylov_iters = nr.krylov_iterations;
        rec.halvings = halvings;
        out.history.push_back(rec);
        if (opt.verbose)
          std::fprintf(stderr, "eps %.3e  res %.2e  log_l2 %.4e  newton %d  krylov %d\n", eps, rec.residual,
                       rec.log_l2, nr.iterations, nr.krylov_iterations);
        done = true;
      } else {
        if (++halvings > opt.max_halvings) {
          out.message = "newton failed after step halvings at eps = " + std::to_string(target) + ": " + nr.message;
          out.f_final = f;
          out.eps_final = eps;
          out.verdict = Verdict::Inconclusive;
          return out;
        }
        ratio = std::sqrt(ratio);
      }
    }
    if (out.history.back().log_l2 > opt.blowup_threshold &&
        static_cast<int>(out.history.size()) >= opt.fit_window && growth_slope(out.history, opt.fit_window) > 0.0) {
      out.verdict = Verdict::Blowup;
      out.f_final = f;
      out.eps_final = eps;
      out.final_he_residual = out.history.back().he_residual;
      out.message = "||log f|| exceeded the blow-up threshold with positive growth";
      return out;
    }
  }
  out.f_final = f;
  out.eps_final = eps;
  out.final_he_residual = out.history.back().he_residual;
  if (have_prev) {
    BasicField x0 = log_cur - (log_cur - log_prev) * cd(eps / (eps - eps_prev));
    BasicField f0 = prob.update(prob.exp_metric(x0), BasicField(x0.model(), 0, 0, x0.rank()));
    out.extrapolated_residual = prob.diagnostics(f0, eps).he_residual;
    out.limit_metric = f0;
    out.limit_residual = out.extrapolated_residual;
    // the limit is fixed only up to holomorphic automorphisms; a Newton
    // polish on the unperturbed equation removes the drift along them
    SolverOptions po = opt;
    po.max_newton = 8;
    po.krylov_max = std::min(opt.krylov_max, 400);
    auto pol = out.extrapolated_residual < opt.tol ? ContinuityProblem::NewtonResult{} : prob.solve(f0, 0.0, po);
    if (pol.ok) {
      out.limit_metric = pol.f;
      out.limit_residual = prob.diagnostics(pol.f, eps).he_residual;
    }
  }
  const auto& h = out.history;
  const int w = opt.fit_window;
  if (static_cast<int>(h.size()) >= w) {
    const double a = h.back().log_l2, b = h[h.size() - w].log_l2;
    out.bounded_tail = std::abs(a - b) <= 1e-3 * (1.0 + a);
  }
  const double lim = out.limit_residual >= 0.0 ? out.limit_residual : out.extrapolated_residual;
  if (out.bounded_tail && lim >= 0.0 && lim < opt.tol) {
    out.verdict = Verdict::Converged;
    out.message = "log f bounded along the path; extrapolated residual below tolerance";
  } else {
    out.verdict = Verdict::Inconclusive;
    out.message = out.bounded_tail ? "extrapolated residual above tolerance" : "log f drifts without blow-up";
  }
  return out;
}

double projection_degree(const BundleSpec& spec, const BasicField& pi) {
  const int n = spec.n();
  Connection conn = chern_connection(spec);
  BasicField k = contract(curvature_std(spec).f11) * cd(0.0, 1.0);
  const double tpk = integrate_function(wedge(pi, k).trace()).real();
  BasicField dp = delbar_E(conn, pi);
  apply_class_mask(spec, dp);
  const double nd = dp.l2_norm();
  return factorial(n - 1) / (2.0 * kPi) * (tpk - nd * nd);
}

DestabilizerReport extract_destabilizer(const PathResult& path) {
  DestabilizerReport rep;
  const BundleSpec& spec = path.init.spec;
  const auto& model = spec.model;
  const int n = spec.n();
  const int r = spec.rank();
  rep.mu_E = slope(spec);
  if (path.f_final.empty()) {
    rep.status = "INDETERMINATE";
    return rep;
  }
  ContinuityProblem prob(spec);
  GridField fg = to_grid(path.f_final);
  std::vector<std::vector<int>> blocks;
  {
    const auto cls = spec.classes();
    int nc = 0;
    for (int c : cls) nc = std::max(nc, c + 1);
    blocks.assign(nc, {});
    for (int i = 0; i < r; ++i) blocks[cls[i]].push_back(i);
  }
  PointEig e = eig_blocks(fg, blocks);
  double M = -1e300;
  for (const auto& l : e.lam) M = std::max(M, std::log(l.maxCoeff()));
  std::vector<double> all;
  for (const auto& l : e.lam)
    for (int i = 0; i < r; ++i) all.push_back(std::exp(std::log(l(i)) - M));
  std::sort(all.begin(), all.end());
  double gap = 0.0, thr = 0.0;
  for (size_t i = 1; i < all.size(); ++i)
    if (all[i] - all[i - 1] > gap) {
      gap = all[i] - all[i - 1];
      thr = 0.5 * (all[i] + all[i - 1]);
    }
  rep.gap = gap;
  rep.threshold = thr;
  if (gap < 0.5) {
    rep.status = "INDETERMINATE";
    return rep;
  }
  auto build = [&](bool small) {
    GridField pg = eig_function(e, fg.points, r, [](double) { return cd(0.0); });
    for (size_t pt = 0; pt < fg.points; ++pt) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(r, r);
      for (int i = 0; i < r; ++i) {
        const double v = std::exp(std::log(e.lam[pt](i)) - M);
        if ((v < thr) == small) acc += e.vec[pt].col(i) * e.vec[pt].col(i).adjoint();
      }
      pg.mat(pt, 0) = acc;
    }
    BasicField pi = from_grid(pg, model);
    apply_class_mask(spec, pi);
    pi.hermitize();
    return pi;
  };
  auto evaluate = [&](const BasicField& pi) {
    DestabilizerReport d = rep;
    d.pi = pi;
    const double tr = pi.trace().zero_mode()(0, 0).real();
    d.rank = static_cast<int>(std::lround(tr));
    d.rank_defect = std::abs(tr - d.rank);
    GridField pg = to_grid(pi);
    GridField p2 = grid_wedge(n, pg, pg);
    for (size_t pt = 0; pt < pg.points; ++pt) {
      d.projection_residual = std::max(d.projection_residual, (p2.mat(pt, 0) - pg.mat(pt, 0)).cwiseAbs().maxCoeff());
      d.adjoint_residual =
          std::max(d.adjoint_residual, (pg.mat(pt, 0) - pg.mat(pt, 0).adjoint()).cwiseAbs().maxCoeff());
      d.trace_deviation = std::max(d.trace_deviation, std::abs(pg.mat(pt, 0).trace() - cd(d.rank)));
    }
    Connection conn = chern_connection(spec);
    BasicField dp = delbar_E(conn, pi);
    GridField dpg = to_grid(dp);
    GridField comp = grid_wedge(n, to_grid(BasicField::identity(model, r) - pi), dpg);
    double l1 = 0.0;
    for (size_t pt = 0; pt < comp.points; ++pt) l1 += frob(comp, pt);
    d.weak_holomorphy = l1 / static_cast<double>(comp.points) * model->volume();
    if (d.rank > 0 && d.rank < r && d.rank_defect < 1e-3) {
      d.degree = projection_degree(spec, pi);
      d.slope = d.degree / d.rank;
    }
    return d;
  };
  DestabilizerReport best = evaluate(build(true));
  if (!(best.rank > 0 && best.rank < r && best.slope >= best.mu_E - 1e-6)) {
    DestabilizerReport alt = evaluate(build(false));
    if (alt.rank > 0 && alt.rank < r && alt.slope >= alt.mu_E - 1e-6) best = alt;
  }
  const bool valid = best.rank > 0 && best.rank < r && best.rank_defect < 1e-3;
  best.ok = valid;
  best.status = valid ? "OK" : "INDETERMINATE";
  return best;
}

}  // namespace folhe
