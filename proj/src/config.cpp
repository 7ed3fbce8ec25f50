#include "folhe/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace folhe {

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

class Section {
 public:
  Section(const ConfigFile& cfg, std::string name) : name_(std::move(name)) {
    auto it = cfg.values.find(name_);
    if (it != cfg.values.end()) kv_ = &it->second;
  }

  bool present() const { return kv_ != nullptr; }
  std::string key(const std::string& k) const { return name_ + "." + k; }
  bool has(const std::string& k) const { return kv_ && kv_->count(k); }

  const std::string& raw(const std::string& k) const {
    if (!has(k)) throw ConfigError(key(k), "missing");
    used_.insert(k);
    return kv_->at(k);
  }
  std::string str(const std::string& k, const std::string& def) const { return has(k) ? raw(k) : def; }

  long long integer(const std::string& k) const { return parse_int(raw(k), k); }
  long long integer(const std::string& k, long long def) const { return has(k) ? integer(k) : def; }
  double real(const std::string& k) const { return parse_real(raw(k), k); }
  double real(const std::string& k, double def) const { return has(k) ? real(k) : def; }

  long long parse_int(const std::string& text, const std::string& k) const {
    std::string t = trim(text);
    size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(t, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key(k), "expected an integer, got '" + text + "'");
    }
    if (pos != t.size()) throw ConfigError(key(k), "expected an integer, got '" + text + "'");
    return v;
  }
  double parse_real(const std::string& text, const std::string& k) const {
    std::string t = trim(text);
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key(k), "expected a number, got '" + text + "'");
    }
    if (pos != t.size() || !std::isfinite(v)) throw ConfigError(key(k), "expected a number, got '" + text + "'");
    return v;
  }

  std::vector<long long> int_list(const std::string& text, const std::string& k) const {
    std::vector<long long> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_int(s, k));
    return out;
  }
  std::vector<double> real_list(const std::string& text, const std::string& k) const {
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_real(s, k));
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& k, int rows, int cols) const {
    auto rs = split(raw(k), ';');
    if (static_cast<int>(rs.size()) != rows) throw ConfigError(key(k), "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      auto v = real_list(rs[i], k);
      if (static_cast<int>(v.size()) != cols)
        throw ConfigError(key(k), "expected " + std::to_string(cols) + " entries per row");
      for (int j = 0; j < cols; ++j) m(i, j) = v[j];
    }
    return m;
  }

  void reject_unused() const {
    if (!kv_) return;
    for (const auto& [k, v] : *kv_)
      if (!used_.count(k)) throw ConfigError(key(k), "unknown key");
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  mutable std::set<std::string> used_;
};

ConfigFile from_ptree(const boost::property_tree::ptree& pt, const std::string& path) {
  ConfigFile cfg;
  cfg.path = path;
  for (const auto& [sec, body] : pt) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(sec, "key outside of a section");
    cfg.sections.push_back(sec);
    auto& kv = cfg.values[sec];
    for (const auto& [k, v] : body) kv[k] = trim(v.data());
  }
  return cfg;
}

cd parse_coeff(const Section& s, const std::string& k) {
  auto v = s.real_list(s.raw(k), k);
  if (v.empty() || v.size() > 2) throw ConfigError(s.key(k), "expected 're' or 're,im'");
  return cd(v[0], v.size() == 2 ? v[1] : 0.0);
}

IntVec parse_mode(const Section& s, const std::string& k, int d) {
  auto v = s.int_list(s.raw(k), k);
  if (static_cast<int>(v.size()) != d) throw ConfigError(s.key(k), "expected " + std::to_string(d) + " integers");
  return IntVec(v.begin(), v.end());
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path q(p);
  return q.is_absolute() ? q.string() : (base / q).lexically_normal().string();
}

}  // namespace

ConfigFile parse_config(const std::string& text, const std::string& path) {
  std::istringstream is(text);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path + ":" + std::to_string(e.line()), e.message());
  }
  return from_ptree(pt, path);
}

ConfigFile read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

ModelParams parse_model(const ConfigFile& cfg) {
  Section s(cfg, "model");
  if (!s.present()) throw ConfigError("model", "missing section");
  ModelParams p;
  p.n = static_cast<int>(s.integer("n"));
  p.m = static_cast<int>(s.integer("m"));
  p.d = static_cast<int>(s.integer("d", 2 * p.n + p.m));
  if (p.n < 1) throw ConfigError(s.key("n"), "must be >= 1");
  if (p.m < 1) throw ConfigError(s.key("m"), "must be >= 1");
  if (p.d != 2 * p.n + p.m) throw ConfigError(s.key("d"), "must equal 2n + m");
  p.cutoff = static_cast<int>(s.integer("cutoff"));
  if (p.cutoff < 1) throw ConfigError(s.key("cutoff"), "must be >= 1");
  p.chi = s.real("chi", 1.0);
  if (!(p.chi > 0.0)) throw ConfigError(s.key("chi"), "must be > 0");
  auto rows = split(s.raw("xi"), ';');
  if (static_cast<int>(rows.size()) != p.m) throw ConfigError(s.key("xi"), "expected m rows separated by ';'");
  for (const auto& r : rows) {
    SymVec v;
    try {
      v = parse_symvec(r);
    } catch (const std::exception& e) {
      throw ConfigError(s.key("xi"), e.what());
    }
    if (static_cast<int>(v.size()) != p.d) throw ConfigError(s.key("xi"), "each row needs d entries");
    p.xi.push_back(v);
  }
  const int t = 2 * p.n;
  if (s.has("theta")) p.theta = s.matrix("theta", t, p.d);
  if (s.has("g")) p.g = s.matrix("g", t, t);
  if (s.has("J")) p.J = s.matrix("J", t, t);
  if (s.has("omega")) p.omega = s.matrix("omega", t, t);
  s.reject_unused();
  return p;
}

BundleSpec parse_bundle(const ConfigFile& cfg, const ModelPtr& model) {
  Section s(cfg, "bundle");
  if (!s.present()) throw ConfigError("bundle", "missing section");
  const int n = model->n(), d = model->d();
  std::vector<LineFactor> factors;
  for (const auto& part : split(s.raw("factors"), ';')) {
    auto c = s.int_list(part, "factors");
    if (static_cast<int>(c.size()) != n)
      throw ConfigError(s.key("factors"), "each factor needs " + std::to_string(n) + " Chern numbers");
    factors.push_back(line(model, std::vector<int>(c.begin(), c.end())));
  }
  if (s.has("holonomy")) {
    auto hs = split(s.raw("holonomy"), ';');
    if (hs.size() != factors.size()) throw ConfigError(s.key("holonomy"), "expected one entry per factor");
    for (size_t i = 0; i < hs.size(); ++i) {
      auto y = s.real_list(hs[i], "holonomy");
      if (static_cast<int>(y.size()) != 2 * n)
        throw ConfigError(s.key("holonomy"), "each factor needs " + std::to_string(2 * n) + " values");
      factors[i].y = Eigen::Map<Eigen::VectorXd>(y.data(), 2 * n);
    }
  }
  std::string label = s.str("label", "");
  s.reject_unused();

  const int r = static_cast<int>(factors.size());
  std::vector<ExtensionTerm> ext;
  std::vector<HiddenTerm> hidden;
  for (const auto& name : cfg.sections) {
    bool is_ext = name.rfind("extension", 0) == 0, is_hidden = name.rfind("hidden", 0) == 0;
    if (!is_ext && !is_hidden) continue;
    Section e(cfg, name);
    int row = static_cast<int>(e.integer("row")), col = static_cast<int>(e.integer("col"));
    if (row < 0 || row >= r) throw ConfigError(e.key("row"), "out of range");
    if (col < 0 || col >= r) throw ConfigError(e.key("col"), "out of range");
    IntVec k = parse_mode(e, "k", d);
    cd coeff = parse_coeff(e, "coeff");
    if (is_ext) {
      int comp = static_cast<int>(e.integer("comp", 0));
      if (comp < 0 || comp >= n) throw ConfigError(e.key("comp"), "out of range");
      ext.push_back({row, col, k, comp, coeff});
    } else {
      hidden.push_back({row, col, k, coeff});
    }
    e.reject_unused();
  }
  try {
    return make_bundle(model, factors, ext, hidden, label);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bundle", e.what());
  }
}

SolverOptions parse_solver(const ConfigFile& cfg, SolverOptions o) {
  Section s(cfg, "solver");
  o.eps_start = s.real("eps_start", o.eps_start);
  o.eps_min = s.real("eps_min", o.eps_min);
  o.ratio = s.real("ratio", o.ratio);
  o.tol = s.real("tol", o.tol);
  o.newton_atol = s.real("newton_atol", o.newton_atol);
  o.max_newton = static_cast<int>(s.integer("max_newton", o.max_newton));
  o.max_halvings = static_cast<int>(s.integer("max_halvings", o.max_halvings));
  o.blowup_threshold = s.real("blowup_threshold", o.blowup_threshold);
  o.fit_window = static_cast<int>(s.integer("fit_window", o.fit_window));
  o.krylov_restart = static_cast<int>(s.integer("krylov_restart", o.krylov_restart));
  o.krylov_max = static_cast<int>(s.integer("krylov_max", o.krylov_max));
  s.reject_unused();
  validate_solver(o);
  return o;
}

void validate_solver(const SolverOptions& o) {
  auto positive = [](double v, const char* k) {
    if (!(v > 0.0)) throw ConfigError(std::string("solver.") + k, "must be > 0");
  };
  positive(o.tol, "tol");
  positive(o.newton_atol, "newton_atol");
  positive(o.eps_min, "eps_min");
  positive(o.eps_start, "eps_start");
  positive(o.blowup_threshold, "blowup_threshold");
  if (!(o.eps_min < o.eps_start)) throw ConfigError("solver.eps_min", "schedule must decrease from eps_start");
  if (!(o.ratio > 0.0 && o.ratio < 1.0)) throw ConfigError("solver.ratio", "must lie in (0, 1)");
  auto at_least_one = [](int v, const char* k) {
    if (v < 1) throw ConfigError(std::string("solver.") + k, "must be >= 1");
  };
  at_least_one(o.max_newton, "max_newton");
  at_least_one(o.fit_window, "fit_window");
  at_least_one(o.krylov_restart, "krylov_restart");
  at_least_one(o.krylov_max, "krylov_max");
  if (o.max_halvings < 0) throw ConfigError("solver.max_halvings", "must be >= 0");
}

RunConfig read_run_config(const std::string& path) {
  ConfigFile f = read_config(path);
  Section s(f, "run");
  if (!s.present()) throw ConfigError("run", "missing section");
  fs::path base = fs::path(path).parent_path();
  RunConfig cfg;
  cfg.model_path = resolve(base, s.raw("model"));
  cfg.bundle_path = resolve(base, s.str("bundle", ""));
  cfg.solver_path = resolve(base, s.str("solver", ""));
  cfg.out = s.str("out", "");
  cfg.csv = s.str("csv", "");
  long long seed = s.integer("seed", 1);
  if (seed < 0) throw ConfigError(s.key("seed"), "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  s.reject_unused();
  return cfg;
}

void load_run_files(RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("run.model", "missing");
  ConfigFile mf = read_config(cfg.model_path);
  cfg.model = parse_model(mf);
  if (cfg.model.cutoff < 4) throw ConfigError("model.cutoff", "must be >= 4");
  cfg.echo["model"] = mf.values.at("model");
  const ConfigFile* solver_src = &mf;
  ConfigFile bf, sf;
  if (!cfg.bundle_path.empty()) {
    bf = read_config(cfg.bundle_path);
    for (const auto& sec : bf.sections)
      if (sec != "solver") cfg.echo[sec] = bf.values.at(sec);
    if (bf.has("solver")) solver_src = &bf;
  }
  if (!cfg.solver_path.empty()) {
    sf = read_config(cfg.solver_path);
    solver_src = &sf;
  }
  cfg.solver = parse_solver(*solver_src, cfg.solver);
  if (solver_src->has("solver")) cfg.echo["solver"] = solver_src->values.at("solver");
}

}  // namespace folhe
