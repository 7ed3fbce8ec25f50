#include "folhe/reproduce.hpp"

#include "folhe/instanton.hpp"
#include "folhe/kernel.hpp"
#include "folhe/moduli.hpp"
#include "folhe/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace folhe {

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

std::string path_for(const std::string& stability) {
  if (stability == "stable" || stability == "polystable-not-stable") return "CONVERGED";
  if (stability == "unstable") return "BLOWUP";
  if (stability == "semistable-not-polystable") return "INCONCLUSIVE";
  return "";
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace

Json KernelSuiteResult::json() const {
  Json j;
  j["pass"] = pass;
  j["delbar_squared_rel"] = delbar_squared;
  j["del_squared_rel"] = del_squared;
  j["anticommutator_rel"] = anticommutator;
  j["stokes_samples"] = stokes_samples;
  j["stokes_worst"] = stokes;
  j["lefschetz_adjoint_rel"] = lefschetz_adjoint;
  j["p_adjoint_rel"] = p_adjoint;
  return j;
}

KernelSuiteResult kernel_suite(const ModelPtr& m, std::uint64_t seed, int samples) {
  KernelSuiteResult r;
  std::mt19937_64 rng(seed);
  const int n = m->n();
  const double deriv2 = std::pow(2 * kPi * m->cutoff(), 2);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      auto a = random_field(m, p, q, 1, rng);
      double scale = std::max(1e-300, a.max_coeff() * deriv2);
      if (q + 2 <= n) r.delbar_squared = std::max(r.delbar_squared, delbar(delbar(a)).max_coeff() / scale);
      if (p + 2 <= n) r.del_squared = std::max(r.del_squared, del(del(a)).max_coeff() / scale);
      r.anticommutator = std::max(r.anticommutator, (delbar(del(a)) + del(delbar(a))).max_coeff() / scale);
    }
  r.stokes_samples = samples;
  for (int t = 0; t < samples; ++t) {
    auto a = random_field(m, n - 1, n, 1, rng);
    auto b = random_field(m, n, n - 1, 1, rng);
    r.stokes = std::max(r.stokes, std::abs(integrate(del(a) + delbar(b))));
  }
  {
    auto a = random_field(m, 0, 1, 1, rng);
    auto b = random_field(m, 1, 2, 1, rng);
    if (n >= 2) r.lefschetz_adjoint = rel(lefschetz(a).inner(b), a.inner(contract(b)));
    auto f = random_field(m, 0, 0, 1, rng, true);
    auto h = random_field(m, 0, 0, 1, rng, true);
    r.p_adjoint = rel(p_operator(f).inner(h), f.inner(p_adjoint(h)));
  }
  r.pass = r.delbar_squared < 1e-13 && r.del_squared < 1e-13 && r.anticommutator < 1e-13 && r.stokes < 1e-13 &&
           r.lefschetz_adjoint < 1e-11 && r.p_adjoint < 1e-11;
  return r;
}

BasicField random_metric(const BundleSpec& spec, std::mt19937_64& rng, double amp) {
  BasicField x = random_field(spec.model, 0, 0, spec.rank(), rng, true, 1);
  apply_class_mask(spec, x);
  x *= cd(amp / std::max(1e-300, grid_max_abs(to_grid(x))));
  return hermitian_function(x, [](double t) { return std::exp(t); });
}

Reproducer::Reproducer(ReproduceOptions opt) : opt_(std::move(opt)) {}

std::string Reproducer::title(int id) {
  static const char* titles[kCount] = {
      "kernel exactness suite",
      "degree is independent of the metric",
      "Einstein factor of a solved line bundle metric",
      "continuity-path verdict matches stability",
      "blow-up estimates along every path",
      "destabilizer quality on blow-up cases",
      "Harder-Narasimhan filtration of L2+L1+L0 and shuffles",
      "non-compactness certificate on T^3",
      "trace-free HE connection is an Omega-instanton",
      "Bogomolov integral",
  };
  if (id < 1 || id > kCount) throw std::out_of_range("criterion id must be in 1.." + std::to_string(kCount));
  return titles[id - 1];
}

CriterionResult Reproducer::run(int id) {
  auto t0 = Clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = kernel_exactness(); break;
    case 2: r = degree_independence(); break;
    case 3: r = einstein_factor_check(); break;
    case 4: r = dichotomy(); break;
    case 5: r = blowup_estimates(); break;
    case 6: r = destabilizer_quality(); break;
    case 7: r = hn_filtration(); break;
    case 8: r = moduli_certificate(); break;
    case 9: r = instanton_equivalence(); break;
    case 10: r = bogomolov(); break;
    default: throw std::out_of_range("criterion id must be in 1.." + std::to_string(kCount));
  }
  r.id = id;
  r.title = title(id);
  r.seconds = since(t0);
  return r;
}

std::vector<CriterionResult> Reproducer::run_all() {
  std::vector<CriterionResult> out;
  for (int i = 1; i <= kCount; ++i) out.push_back(run(i));
  return out;
}

CriterionResult Reproducer::kernel_exactness() {
  CriterionResult r;
  auto t0 = Clock::now();
  auto m = Model::product(2, 1, 8);
  auto ks = kernel_suite(m, opt_.seed, 100);
  double secs = since(t0);
  r.details = ks.json();
  r.details["model"] = m->normalization();
  r.timings["suite"] = secs;
  r.pass = ks.pass && secs < 30.0;
  r.summary = "delbar^2 " + sci(ks.delbar_squared) + ", Stokes worst " + sci(ks.stokes) + " over 100, P/P* " +
              sci(ks.p_adjoint) + ", L/Lambda " + sci(ks.lefschetz_adjoint) + (secs < 30.0 ? "" : ", over 30 s");
  return r;
}

CriterionResult Reproducer::degree_independence() {
  CriterionResult r;
  auto m = Model::product(1, 1, 8);
  std::mt19937_64 rng(opt_.seed + 1);
  ExtensionTerm e{0, 1, {0, 0, 0}, 0, cd(0.3, 0.1)};
  HiddenTerm h{0, 1, {1, -1, 0}, cd(0.2, 0.0)};
  auto ext = make_bundle(m, {line1(m, 0), line1(m, 0)}, {e}, {h});
  auto spec = direct_sum({make_bundle(m, {line1(m, 1)}), ext});
  spec.label = "L1+Ext(L0,L0)";
  const double d0 = degree(spec);
  double worst = 0.0;
  Json changes = Json::array();
  for (int t = 0; t < 50; ++t) {
    BasicField f = random_metric(spec, rng, 1.0);
    if (t % 2 == 0) {
      BasicField psi = random_field(m, 0, 0, 1, rng, true, 2);
      BasicField ep = hermitian_function(psi, [](double x) { return std::exp(x); });
      GridField fg = to_grid(f), eg = to_grid(ep);
      for (size_t pt = 0; pt < fg.points; ++pt) fg.mat(pt, 0) *= eg.mat(pt, 0)(0, 0);
      f = from_grid(fg, m);
      f.hermitize();
    }
    double dev = std::abs(degree(spec, f) - d0);
    worst = std::max(worst, dev);
    changes.push_back(dev);
  }
  r.details["bundle"] = spec.label;
  r.details["degree_standard_metric"] = d0;
  r.details["degree_closed_form"] = degree_closed_form(spec);
  r.details["metrics"] = 50;
  r.details["deviations"] = changes;
  r.details["worst"] = worst;
  r.pass = worst < 1e-10 && std::abs(d0 - degree_closed_form(spec)) < 1e-10;
  r.summary = "deg " + format_double(d0) + ", worst change " + sci(worst) + " over 50 metrics";
  return r;
}

CriterionResult Reproducer::einstein_factor_check() {
  CriterionResult r;
  auto t0 = Clock::now();
  auto m = Model::product(1, 1, 8);
  // delbar_E = delbar_ref + delbar u: gauge equivalent to L1, but h_std is not HE
  auto l1 = make_bundle(m, {line1(m, 1)}, {}, {}, "L1 with gauge term");
  l1.b01 += delbar(BasicField::scalar_mode(m, m->lattice_basis()[0], cd(0.05, 0.02)));
  const double before =
      grid_max_abs(to_grid(mean_curvature_std(l1) - BasicField::identity(m, 1) * cd(2 * kPi)));
  auto p = trace_path(l1, opt_.solver);
  ContinuityProblem prob(p.init.spec);
  const BasicField& f = p.limit_metric.empty() ? p.f_final : p.limit_metric;
  BasicField K = prob.he_defect(f) + BasicField::identity(m, 1) * cd(prob.gamma());
  double dev = grid_max_abs(to_grid(K - BasicField::identity(m, 1) * cd(2 * kPi)));
  double secs = since(t0);
  r.timings["solve"] = secs;
  r.details["volume"] = m->volume();
  r.details["bundle"] = l1.label;
  r.details["standard_metric_deviation"] = before;
  r.details["verdict"] = to_string(p.verdict);
  r.details["gamma"] = prob.gamma();
  r.details["expected"] = 2 * kPi;
  r.details["max_pointwise_deviation"] = dev;
  r.pass = p.verdict == Verdict::Converged && dev < 1e-8 && before > 1e-3 && secs < 10.0;
  r.summary = "max |i Lambda F - 2 pi| = " + sci(dev) + (secs < 10.0 ? "" : ", over 10 s");
  return r;
}

const std::vector<Reproducer::BatteryRun>& Reproducer::battery_runs() {
  if (battery_) return *battery_;
  std::vector<BatteryRun> runs;
  auto m = Model::product(1, 1, opt_.battery_cutoff);
  for (auto& c : battery(m)) {
    BatteryRun br;
    br.bcase = c;
    auto t0 = Clock::now();
    br.stability = stability_verdict(c.spec).verdict;
    br.expected_from_stability = path_for(br.stability);
    br.path = trace_path(c.spec, opt_.solver);
    if (br.path.verdict == Verdict::Blowup) br.destabilizer = extract_destabilizer(br.path);
    br.seconds = since(t0);
    runs.push_back(std::move(br));
  }
  battery_ = std::move(runs);
  return *battery_;
}

CriterionResult Reproducer::dichotomy() {
  CriterionResult r;
  const auto& runs = battery_runs();
  int matched = 0;
  bool fast = true;
  Json cases = Json::array();
  for (const auto& b : runs) {
    std::string got = to_string(b.path.verdict);
    bool ok = got == b.expected_from_stability && got == b.bcase.expected_path &&
              b.stability == b.bcase.expected_stability;
    matched += ok;
    fast = fast && b.seconds < 300.0;
    Json c;
    c["bundle"] = b.bcase.name;
    c["rank"] = b.bcase.spec.rank();
    c["slope"] = slope(b.bcase.spec);
    c["stability"] = b.stability;
    c["expected_path"] = b.expected_from_stability;
    c["path_verdict"] = got;
    c["match"] = ok;
    c["final_eps"] = b.path.eps_final;
    c["extrapolated_residual"] = b.path.extrapolated_residual;
    c["message"] = b.path.message;
    cases.push_back(c);
    r.timings[b.bcase.name] = b.seconds;
  }
  const int total = static_cast<int>(runs.size());
  r.details["cutoff"] = opt_.battery_cutoff;
  r.details["cases"] = cases;
  r.details["matched"] = matched;
  r.details["total"] = total;
  r.pass = total >= 8 && matched == total && fast;
  r.summary = std::to_string(matched) + "/" + std::to_string(total) + " verdicts match at N=" +
              std::to_string(opt_.battery_cutoff) + (fast ? "" : ", a run exceeded 5 min");
  return r;
}

CriterionResult Reproducer::blowup_estimates() {
  CriterionResult r;
  double worst_m = -1e300, worst_est = -1e300;
  size_t steps = 0;
  bool ok = true;
  Json cases = Json::array();
  for (const auto& b : battery_runs()) {
    double cm = -1e300, ce = -1e300;
    for (const auto& h : b.path.history) {
      cm = std::max(cm, h.m_bound_gap);
      double rel_est = h.estimate_gap / std::max(1.0, h.estimate_scale);
      ce = std::max(ce, rel_est);
      ok = ok && h.m_bound_gap <= 1e-6 && h.estimate_gap <= 1e-8 * std::max(1.0, h.estimate_scale);
      ++steps;
    }
    worst_m = std::max(worst_m, cm);
    worst_est = std::max(worst_est, ce);
    Json c;
    c["bundle"] = b.bcase.name;
    c["steps"] = b.path.history.size();
    c["max_m_bound_gap"] = cm;
    c["max_estimate_gap_rel"] = ce;
    cases.push_back(c);
  }
  r.details["cases"] = cases;
  r.details["steps"] = steps;
  r.pass = ok && steps > 0;
  r.summary = std::to_string(steps) + " accepted steps, max(m_eps - max|K0|/eps) " + sci(worst_m) +
              ", max estimate gap " + sci(worst_est);
  return r;
}

CriterionResult Reproducer::destabilizer_quality() {
  CriterionResult r;
  int blowups = 0, good = 0;
  Json cases = Json::array();
  for (const auto& b : battery_runs()) {
    if (!b.destabilizer) continue;
    ++blowups;
    const auto& d = *b.destabilizer;
    bool ok = d.ok && d.projection_residual < 1e-6 && d.adjoint_residual < 1e-6 && d.trace_deviation < 1e-6 &&
              d.rank_defect < 1e-6 && d.weak_holomorphy < 1e-4 && d.slope >= d.mu_E - 1e-6;
    good += ok;
    Json c = destabilizer_json(d);
    c.erase("projection");
    c["bundle"] = b.bcase.name;
    c["pass"] = ok;
    cases.push_back(c);
  }
  r.details["cases"] = cases;
  r.pass = blowups > 0 && good == blowups;
  r.summary = std::to_string(good) + "/" + std::to_string(blowups) + " blow-up cases give a valid destabilizer";
  return r;
}

CriterionResult Reproducer::hn_filtration() {
  CriterionResult r;
  auto m = Model::product(1, 1, 4);
  std::vector<int> cs = {0, 1, 2};
  int variants = 0, good = 0;
  Json cases = Json::array();
  do {
    std::vector<std::vector<int>> classes;
    std::string label;
    for (int c : cs) {
      classes.push_back({c});
      label += (label.empty() ? "L" : "+L") + std::to_string(c);
    }
    auto hn = harder_narasimhan(line_sum(m, classes, label));
    bool ok = hn.supported && hn.steps.size() == 3;
    for (size_t i = 0; ok && i < 3; ++i) {
      const auto& s = hn.steps[i];
      std::vector<int> got;
      for (int f : s.factors) got.push_back(cs[f]);
      std::sort(got.rbegin(), got.rend());
      std::vector<int> want;
      for (int c = 2; c >= 2 - static_cast<int>(i); --c) want.push_back(c);
      ok = s.rank == static_cast<int>(i) + 1 && std::abs(s.quotient_slope - (2.0 - i)) < 1e-9 && got == want;
    }
    good += ok;
    ++variants;
    Json c;
    c["bundle"] = label;
    c["filtration"] = filtration_json(hn);
    c["pass"] = ok;
    cases.push_back(c);
  } while (std::next_permutation(cs.begin(), cs.end()));
  r.details["cases"] = cases;
  r.pass = variants == 6 && good == 6;
  r.summary = std::to_string(good) + "/6 orderings give quotient slopes 2 > 1 > 0";
  return r;
}

CriterionResult Reproducer::moduli_certificate() {
  CriterionResult r;
  auto xi = parse_symvec("1,sqrt2,sqrt3");
  auto c = noncompactness_certificate(xi, 10);
  auto reg = noncompactness_certificate(parse_symvec("0,0,1"), 10);
  auto cert_json = [](const ModuliCertificate& m) {
    Json j;
    j["status"] = m.status;
    j["conclusion"] = m.conclusion;
    Json xs = Json::array();
    for (const auto& v : m.xi) xs.push_back(v.str());
    j["xi"] = xs;
    j["basic_lattice"] = m.basic_lattice;
    Json seq = Json::array();
    for (const auto& y : m.sequence) {
      Json row = Json::array();
      for (const auto& v : y) row.push_back(v.str());
      seq.push_back(row);
    }
    j["sequence"] = seq;
    j["curvature_norm"] = m.curvature_norm;
    j["same_class"] = m.same_class;
    j["min_pairwise_distance2"] = rational_str(m.min_pairwise_distance2);
    j["no_convergent_subsequence"] = m.no_convergent_subsequence;
    return j;
  };
  r.details["irrational"] = cert_json(c);
  r.details["regular"] = cert_json(reg);
  r.pass = c.status == "certificate" && c.same_class && c.no_convergent_subsequence &&
           c.min_pairwise_distance2 >= 1 && c.sequence.size() == 10 && reg.status == "compact";
  r.summary = "xi=(1,sqrt2,sqrt3): " + c.status + ", min distance^2 " + rational_str(c.min_pairwise_distance2) +
              "; xi=(0,0,1): " + reg.status;
  return r;
}

CriterionResult Reproducer::instanton_equivalence() {
  CriterionResult r;
  auto t0 = Clock::now();
  auto m = Model::product(2, 1, 2);
  auto spec = hidden_sl3_bundle(m);
  auto path = trace_path(spec, opt_.solver);
  const BasicField& f = path.limit_metric.empty() ? path.f_final : path.limit_metric;
  auto rep = instanton_check(path.init.spec, f);
  r.timings["solve_and_check"] = since(t0);
  r.details["bundle"] = spec.label;
  r.details["model"] = m->normalization();
  r.details["verdict"] = to_string(path.verdict);
  r.details["instanton_residual"] = rep.residual;
  r.details["yang_mills_residual"] = rep.ym_residual;
  r.details["f02_norm"] = rep.f02_norm;
  r.details["mean_curvature_trace_free"] = rep.mean_curvature;
  r.details["curvature_norm"] = rep.curvature_norm;
  r.pass = path.verdict == Verdict::Converged && rep.residual < 1e-8 && rep.ym_residual < 1e-8 &&
           rep.curvature_norm > 1.0;
  r.summary = "||*F + Omega^F|| " + sci(rep.residual) + ", ||d_A *F|| " + sci(rep.ym_residual) + ", |F_0| " +
              sci(rep.curvature_norm);
  return r;
}

CriterionResult Reproducer::bogomolov() {
  CriterionResult r;
  auto m = Model::product(2, 1, 3);
  auto id2 = BasicField::identity(m, 2);
  auto flat = line_sum(m, {{1, 0}, {1, 0}}, "L(1,0)+L(1,0)");
  auto split = line_sum(m, {{1, -1}, {0, 0}}, "L(1,-1)+L(0,0)");
  double bf = bogomolov_integral(flat, id2);
  double bs = bogomolov_integral(split, id2);
  const double closed = -2.0 * 1.0 * (-1.0) / m->volume();
  r.details["projectively_flat"] = {{"bundle", flat.label}, {"integral", bf}};
  r.details["split"] = {{"bundle", split.label}, {"integral", bs}, {"closed_form", closed}};
  r.pass = std::abs(bf) < 1e-10 && bs > 0.0 && std::abs(bs - closed) < 1e-9;
  r.summary = "flat " + sci(bf) + ", split " + format_double(bs) + " vs closed form " + format_double(closed);
  return r;
}

Json criterion_report(const CriterionResult& r, std::uint64_t seed) {
  Json rep = make_report("reproduce-all", {{"run", {{"seed", std::to_string(seed)}}}});
  rep["criterion"] = r.id;
  rep["title"] = r.title;
  rep["verdict"] = r.pass ? "PASS" : "FAIL";
  rep["summary"] = r.summary;
  rep["details"] = r.details;
  finish_report(rep, r.seconds, r.timings);
  return rep;
}

}  // namespace folhe
