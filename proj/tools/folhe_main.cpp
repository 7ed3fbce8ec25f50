// folhe: command-line front-end. One subcommand per process; reports are JSON.

#include "folhe/bundles.hpp"
#include "folhe/config.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/instanton.hpp"
#include "folhe/moduli.hpp"
#include "folhe/report.hpp"
#include "folhe/reproduce.hpp"
#include "folhe/stability.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace folhe;

namespace {

constexpr int kOk = 0, kError = 1, kUndecided = 2;

using Clock = std::chrono::steady_clock;

struct Common {
  std::string config, model, bundle, solver, out, csv;
  std::uint64_t seed = 1;
  bool seed_given = false;
};

void add_common(CLI::App* sub, Common& c, bool needs_bundle) {
  sub->add_option("--config", c.config, "run file with a [run] section");
  sub->add_option("--model", c.model, "model file");
  if (needs_bundle) sub->add_option("--bundle", c.bundle, "bundle file");
  sub->add_option("--solver", c.solver, "file with a [solver] section");
  sub->add_option("--out", c.out, "JSON report path");
  sub->add_option("--seed", c.seed, "seed for randomized checks")->each([&c](const std::string&) {
    c.seed_given = true;
  });
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = read_run_config(c.config);
  if (!c.model.empty()) cfg.model_path = c.model;
  if (!c.bundle.empty()) cfg.bundle_path = c.bundle;
  if (!c.solver.empty()) cfg.solver_path = c.solver;
  if (!c.out.empty()) cfg.out = c.out;
  if (!c.csv.empty()) cfg.csv = c.csv;
  if (c.seed_given || c.config.empty()) cfg.seed = c.seed;
  if (cfg.model_path.empty()) throw ConfigError("run.model", "no model file given (--model or --config)");
  load_run_files(cfg);
  cfg.echo["run"] = {{"model", cfg.model_path}, {"seed", std::to_string(cfg.seed)}};
  if (!cfg.bundle_path.empty()) cfg.echo["run"]["bundle"] = cfg.bundle_path;
  return cfg;
}

struct Loaded {
  RunConfig cfg;
  ModelPtr model;
  BundleSpec spec;
};

Loaded load(const Common& c, bool needs_bundle) {
  Loaded l;
  l.cfg = resolve(c);
  l.model = Model::create(l.cfg.model);
  if (needs_bundle) {
    if (l.cfg.bundle_path.empty()) throw ConfigError("run.bundle", "no bundle file given (--bundle or --config)");
    l.spec = parse_bundle(read_config(l.cfg.bundle_path), l.model);
  }
  return l;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void emit(Json& report, const std::string& out, Clock::time_point t0) {
  finish_report(report, seconds_since(t0));
  if (!out.empty()) write_text_file(out, dump_json(report));
}

int cmd_kernel_check(const Common& c, int count, Clock::time_point t0) {
  ModelPtr m;
  std::map<std::string, std::map<std::string, std::string>> echo;
  std::uint64_t seed = c.seed;
  if (c.model.empty() && c.config.empty()) {
    m = Model::product(2, 1, 8);
    echo["run"] = {{"model", "product n=2 m=1 cutoff=8"}, {"seed", std::to_string(seed)}};
  } else {
    auto l = load(c, false);
    m = l.model;
    seed = l.cfg.seed;
    echo = l.cfg.echo;
  }
  auto ks = kernel_suite(m, seed, count);
  Json rep = make_report("kernel-check", echo);
  rep["normalization"] = m->normalization();
  rep["verdict"] = ks.pass ? "PASS" : "FAIL";
  rep["results"] = ks.json();
  emit(rep, c.out, t0);
  std::printf("kernel-check %s: delbar^2 %.3e, Stokes %.3e, L/Lambda %.3e, P/P* %.3e\n", ks.pass ? "PASS" : "FAIL",
              ks.delbar_squared, ks.stokes, ks.lefschetz_adjoint, ks.p_adjoint);
  return ks.pass ? kOk : kError;
}

double clean(double v) { return v == 0.0 ? 0.0 : v; }

std::string plain(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", clean(v));
  return buf;
}

int cmd_degree(const Common& c, Clock::time_point t0) {
  auto l = load(c, true);
  const auto& s = l.spec;
  Json res;
  res["rank"] = s.rank();
  res["degree"] = clean(degree(s));
  res["degree_closed_form"] = clean(degree_closed_form(s));
  res["slope"] = clean(slope(s));
  res["einstein_factor"] = clean(einstein_factor(s));
  if (s.n() >= 2) res["bogomolov"] = clean(bogomolov_integral(s, BasicField::identity(s.model, s.rank())));
  Json rep = make_report("degree", l.cfg.echo);
  rep["normalization"] = l.model->normalization();
  rep["results"] = res;
  emit(rep, l.cfg.out, t0);
  std::cout << "degree: " << plain(res["degree"].get<double>()) << "\n"
            << "slope: " << plain(res["slope"].get<double>()) << "\n"
            << "einstein_factor: " << plain(res["einstein_factor"].get<double>()) << "\n";
  if (res.contains("bogomolov")) std::cout << "bogomolov: " << plain(res["bogomolov"].get<double>()) << "\n";
  std::cout << "normalization: " << l.model->normalization() << "\n";
  return kOk;
}

int cmd_solve_he(const Common& c, std::optional<double> eps_min, std::optional<double> tol, Clock::time_point t0) {
  auto l = load(c, true);
  if (eps_min) {
    l.cfg.solver.eps_min = *eps_min;
    l.cfg.echo["solver"]["eps_min"] = plain(*eps_min);
  }
  if (tol) {
    l.cfg.solver.tol = *tol;
    l.cfg.echo["solver"]["tol"] = plain(*tol);
  }
  validate_solver(l.cfg.solver);
  auto path = trace_path(l.spec, l.cfg.solver);
  Json rep = make_report("solve-he", l.cfg.echo);
  rep["normalization"] = l.model->normalization();
  rep["verdict"] = to_string(path.verdict);
  Json res;
  res["message"] = path.message;
  res["gamma"] = einstein_factor(l.spec);
  res["eps_final"] = path.eps_final;
  res["extrapolated_residual"] = path.extrapolated_residual;
  res["limit_residual"] = path.limit_residual;
  res["final_he_residual"] = path.final_he_residual;
  res["bounded_tail"] = path.bounded_tail;
  res["history"] = history_json(path.history);
  const BasicField& f = path.limit_metric.empty() ? path.f_final : path.limit_metric;
  res["final_metric"] = field_json(f);
  res["gauge"] = field_json(path.init.gauge);
  if (path.verdict == Verdict::Blowup) res["destabilizer"] = destabilizer_json(extract_destabilizer(path));
  rep["results"] = res;
  emit(rep, l.cfg.out, t0);
  if (!l.cfg.csv.empty()) write_text_file(l.cfg.csv, history_csv(path.history));
  std::printf("solve-he %s: %zu steps, eps_final %.3e, extrapolated residual %.3e\n",
              to_string(path.verdict).c_str(), path.history.size(), path.eps_final, path.extrapolated_residual);
  return path.verdict == Verdict::Inconclusive ? kUndecided : kOk;
}

int cmd_verdict(const Common& c, Clock::time_point t0) {
  auto l = load(c, true);
  auto sv = stability_verdict(l.spec);
  Json rep = make_report("verdict", l.cfg.echo);
  rep["normalization"] = l.model->normalization();
  rep["verdict"] = sv.verdict;
  Json res;
  res["message"] = sv.message;
  res["mu"] = sv.mu;
  res["max_sub_slope"] = sv.max_sub_slope;
  res["end_dim"] = sv.end_dim;
  res["end_dim_graded"] = sv.end_dim_graded;
  res["kernel_gap"] = sv.kernel_gap;
  Json cands = Json::array();
  for (const auto& cand : sv.candidates) cands.push_back(candidate_json(cand));
  res["candidates"] = cands;
  rep["results"] = res;
  emit(rep, l.cfg.out, t0);
  std::printf("verdict: %s (mu %s)\n", sv.verdict.c_str(), format_double(sv.mu).c_str());
  return sv.verdict == "UNSUPPORTED" ? kUndecided : kOk;
}

int cmd_hn(const Common& c, Clock::time_point t0) {
  auto l = load(c, true);
  auto hn = harder_narasimhan(l.spec);
  auto jh = jordan_holder(l.spec);
  Json rep = make_report("hn", l.cfg.echo);
  rep["normalization"] = l.model->normalization();
  rep["verdict"] = hn.supported ? "SUPPORTED" : "UNSUPPORTED";
  rep["results"] = {{"harder_narasimhan", filtration_json(hn)}, {"jordan_holder", filtration_json(jh)}};
  emit(rep, l.cfg.out, t0);
  if (!hn.supported) {
    std::printf("hn: UNSUPPORTED (%s)\n", hn.status.c_str());
    return kUndecided;
  }
  for (const auto& s : hn.steps)
    std::printf("rank %d degree %s quotient slope %s\n", s.rank, format_double(s.degree).c_str(),
                format_double(s.quotient_slope).c_str());
  return kOk;
}

int cmd_moduli(const std::string& xi_text, int count, const std::string& base_text, const std::string& out,
               Clock::time_point t0) {
  SymVec xi, base;
  try {
    xi = parse_symvec(xi_text);
    if (!base_text.empty()) base = parse_symvec(base_text);
  } catch (const std::exception& e) {
    throw ConfigError(xi.empty() ? "moduli.xi" : "moduli.base", e.what());
  }
  if (xi.size() != 3) throw ConfigError("moduli.xi", "expected three entries");
  if (count < 1) throw ConfigError("moduli.count", "must be >= 1");
  auto cert = noncompactness_certificate(xi, count, base);
  Json rep = make_report("moduli-t3", {{"moduli", {{"xi", xi_text}, {"count", std::to_string(count)}}}});
  rep["verdict"] = cert.status;
  Json res;
  res["conclusion"] = cert.conclusion;
  Json xs = Json::array();
  for (const auto& v : cert.xi) xs.push_back(v.str());
  res["xi"] = xs;
  res["basic_lattice"] = cert.basic_lattice;
  auto vec = [](const SymVec& v) {
    Json a = Json::array();
    for (const auto& e : v) a.push_back(e.str());
    return a;
  };
  res["base"] = vec(cert.base);
  res["direction"] = vec(cert.direction);
  Json seq = Json::array();
  for (const auto& y : cert.sequence) seq.push_back(vec(y));
  res["sequence"] = seq;
  res["curvature_norm"] = cert.curvature_norm;
  res["same_class"] = cert.same_class;
  res["min_pairwise_distance2"] = rational_str(cert.min_pairwise_distance2);
  Json dist = Json::array();
  for (const auto& row : cert.pairwise_distance2) {
    Json r = Json::array();
    for (const auto& q : row) r.push_back(rational_str(q));
    dist.push_back(r);
  }
  res["pairwise_distance2"] = dist;
  res["no_convergent_subsequence"] = cert.no_convergent_subsequence;
  rep["results"] = res;
  emit(rep, out, t0);
  std::printf("moduli-t3: %s\n%s\n", cert.status.c_str(), cert.conclusion.c_str());
  return cert.status == "rejected" ? kUndecided : kOk;
}

int cmd_instanton(const Common& c, bool no_solve, Clock::time_point t0) {
  auto l = load(c, true);
  if (l.model->n() < 2) throw ConfigError("model.n", "instanton-check needs n >= 2");
  Json rep = make_report("instanton-check", l.cfg.echo);
  rep["normalization"] = l.model->normalization();
  Json res;
  InstantonReport ir;
  std::string verdict = "CHECKED";
  if (no_solve) {
    ir = instanton_check(l.spec);
  } else {
    auto path = trace_path(l.spec, l.cfg.solver);
    res["path_verdict"] = to_string(path.verdict);
    if (path.verdict != Verdict::Converged) {
      verdict = "INCONCLUSIVE";
      ir = instanton_check(path.init.spec, path.f_final);
    } else {
      const BasicField& f = path.limit_metric.empty() ? path.f_final : path.limit_metric;
      ir = instanton_check(path.init.spec, f);
    }
  }
  rep["verdict"] = verdict;
  res["instanton_residual"] = ir.residual;
  res["yang_mills_residual"] = ir.ym_residual;
  res["f02_norm"] = ir.f02_norm;
  res["mean_curvature_trace_free"] = ir.mean_curvature;
  res["trace_norm"] = ir.trace_norm;
  res["curvature_norm"] = ir.curvature_norm;
  rep["results"] = res;
  emit(rep, l.cfg.out, t0);
  std::printf("instanton-check %s: ||*F + Omega^F|| %.3e, ||d_A *F|| %.3e\n", verdict.c_str(), ir.residual,
              ir.ym_residual);
  return verdict == "INCONCLUSIVE" ? kUndecided : kOk;
}

int cmd_reproduce(const std::string& dir, std::uint64_t seed, const std::vector<int>& only) {
  ReproduceOptions opt;
  opt.seed = seed;
  Reproducer rep(opt);
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= Reproducer::kCount; ++i) ids.push_back(i);
  std::filesystem::create_directories(dir);
  bool all = true;
  Json summary = make_report("reproduce-all", {{"run", {{"seed", std::to_string(seed)}}}});
  Json rows = Json::array();
  double total = 0.0;
  for (int id : ids) {
    auto r = rep.run(id);
    all = all && r.pass;
    total += r.seconds;
    char name[32];
    std::snprintf(name, sizeof name, "criterion_%02d.json", id);
    write_text_file((std::filesystem::path(dir) / name).string(), dump_json(criterion_report(r, seed)));
    std::printf("criterion %d %s: %s [%s]\n", id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.summary.c_str());
    std::fflush(stdout);
    rows.push_back({{"criterion", id}, {"verdict", r.pass ? "PASS" : "FAIL"}, {"summary", r.summary}});
  }
  summary["verdict"] = all ? "PASS" : "FAIL";
  summary["results"] = rows;
  finish_report(summary, total);
  write_text_file((std::filesystem::path(dir) / "summary.json").string(), dump_json(summary));
  return all ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"folhe: Hermitian-Einstein metrics on foliated torus models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kSoftwareVersion);

  Common kc, dc, sc, vc, hc, ic;
  int count = 100;
  auto* kernel = app.add_subcommand("kernel-check", "exactness checks of the form calculus");
  add_common(kernel, kc, false);
  kernel->add_option("--count", count, "random Stokes samples");

  auto* deg = app.add_subcommand("degree", "degree, slope, Einstein factor, Bogomolov integral");
  add_common(deg, dc, true);

  std::optional<double> eps_min, tol;
  auto* solve = app.add_subcommand("solve-he", "continuity path for the Hermitian-Einstein equation");
  add_common(solve, sc, true);
  solve->add_option("--eps-min", eps_min, "smallest eps");
  solve->add_option("--tol", tol, "convergence tolerance");
  solve->add_option("--csv", sc.csv, "per-eps history as CSV");

  auto* verdict = app.add_subcommand("verdict", "algebraic stability verdict");
  add_common(verdict, vc, true);

  auto* hn = app.add_subcommand("hn", "Harder-Narasimhan and Jordan-Hoelder filtrations");
  add_common(hn, hc, true);

  std::string xi, base, mout;
  int mcount = 10;
  auto* mod = app.add_subcommand("moduli-t3", "basic-gauge non-compactness certificate on T^3");
  mod->add_option("--xi", xi, "foliation direction, e.g. \"1,sqrt2,sqrt3\"")->required();
  mod->add_option("--count", mcount, "length of the sequence");
  mod->add_option("--base", base, "base holonomy");
  mod->add_option("--out", mout, "JSON report path");

  bool no_solve = false;
  auto* inst = app.add_subcommand("instanton-check", "Omega-instanton and Yang-Mills residuals");
  add_common(inst, ic, true);
  inst->add_flag("--no-solve", no_solve, "check the standard metric instead of the HE metric");

  std::string rdir = "reproduce";
  std::uint64_t rseed = 1;
  std::vector<int> only;
  auto* repro = app.add_subcommand("reproduce-all", "run every acceptance check and write one report each");
  repro->add_option("--out-dir", rdir, "report directory");
  repro->add_option("--seed", rseed, "seed for randomized checks");
  repro->add_option("--only", only, "criterion ids")->check(CLI::Range(1, Reproducer::kCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kError;
  }

  auto t0 = Clock::now();
  try {
    if (*kernel) return cmd_kernel_check(kc, count, t0);
    if (*deg) return cmd_degree(dc, t0);
    if (*solve) return cmd_solve_he(sc, eps_min, tol, t0);
    if (*verdict) return cmd_verdict(vc, t0);
    if (*hn) return cmd_hn(hc, t0);
    if (*mod) return cmd_moduli(xi, mcount, base, mout, t0);
    if (*inst) return cmd_instanton(ic, no_solve, t0);
    if (*repro) return cmd_reproduce(rdir, rseed, only);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
