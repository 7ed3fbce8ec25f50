#include "folhe/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace folhe {

namespace {

void dump_rec(const Json& j, int indent, int depth, std::string& out) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_rec(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && e.is_primitive();
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_rec(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0.0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  out += '\n';
  return out;
}

Json make_report(const std::string& command,
                 const std::map<std::string, std::map<std::string, std::string>>& config) {
  Json r;
  r["schema"] = kReportSchema;
  r["command"] = command;
  r["version"] = kSoftwareVersion;
  Json cfg = Json::object();
  for (const auto& [sec, kv] : config) {
    Json s = Json::object();
    for (const auto& [k, v] : kv) s[k] = v;
    cfg[sec] = s;
  }
  r["config"] = cfg;
  return r;
}

void finish_report(Json& report, double seconds, const Json& runs) {
  Json w;
  w["seconds"] = seconds;
  if (!runs.empty()) w["runs"] = runs;
  report["wall_clock"] = w;
}

Json history_json(const std::vector<StepRecord>& history) {
  Json a = Json::array();
  for (const auto& h : history) {
    Json s;
    s["eps"] = h.eps;
    s["residual"] = h.residual;
    s["he_residual"] = h.he_residual;
    s["m_eps"] = h.m_eps;
    s["log_l2"] = h.log_l2;
    s["M_eps"] = h.M_eps;
    s["rho"] = h.rho;
    s["max_rho_f"] = h.max_rho_f;
    s["min_f"] = h.min_f;
    s["det_dev"] = h.det_dev;
    s["m_bound_gap"] = h.m_bound_gap;
    s["estimate_gap"] = h.estimate_gap;
    s["estimate_scale"] = h.estimate_scale;
    s["newton_iters"] = h.newton_iters;
    s["krylov_iters"] = h.krylov_iters;
    s["halvings"] = h.halvings;
    a.push_back(s);
  }
  return a;
}

std::string history_csv(const std::vector<StepRecord>& history) {
  std::string out =
      "eps,residual,he_residual,m_eps,log_l2,M_eps,rho,max_rho_f,min_f,det_dev,m_bound_gap,estimate_gap,"
      "estimate_scale,newton_iters,krylov_iters,halvings\n";
  for (const auto& h : history) {
    for (double v : {h.eps, h.residual, h.he_residual, h.m_eps, h.log_l2, h.M_eps, h.rho, h.max_rho_f, h.min_f,
                     h.det_dev, h.m_bound_gap, h.estimate_gap, h.estimate_scale})
      out += format_double(v) + ",";
    out += std::to_string(h.newton_iters) + "," + std::to_string(h.krylov_iters) + "," +
           std::to_string(h.halvings) + "\n";
  }
  return out;
}

Json field_json(const BasicField& f) {
  Json out;
  if (f.empty()) return out;
  out["p"] = f.p();
  out["q"] = f.q();
  out["rank"] = f.rank();
  out["components"] = f.ncomp();
  Json modes = Json::array();
  const auto& ms = f.model()->modes();
  for (size_t k = 0; k < ms.size(); ++k) {
    bool any = false;
    Json coeff = Json::array();
    for (int c = 0; c < f.ncomp(); ++c)
      for (int i = 0; i < f.rank(); ++i)
        for (int j = 0; j < f.rank(); ++j) {
          cd v = f.at(k, c, i, j);
          any = any || v != cd(0.0);
          coeff.push_back(Json::array({v.real(), v.imag()}));
        }
    if (!any) continue;
    Json rec;
    rec["k"] = ms.k[k];
    rec["coeff"] = coeff;
    modes.push_back(rec);
  }
  out["modes"] = modes;
  return out;
}

Json destabilizer_json(const DestabilizerReport& d) {
  Json j;
  j["ok"] = d.ok;
  j["status"] = d.status;
  j["rank"] = d.rank;
  j["rank_defect"] = d.rank_defect;
  j["threshold"] = d.threshold;
  j["gap"] = d.gap;
  j["projection_residual"] = d.projection_residual;
  j["adjoint_residual"] = d.adjoint_residual;
  j["trace_deviation"] = d.trace_deviation;
  j["weak_holomorphy"] = d.weak_holomorphy;
  j["degree"] = d.degree;
  j["slope"] = d.slope;
  j["mu_E"] = d.mu_E;
  j["projection"] = field_json(d.pi);
  return j;
}

Json filtration_json(const Filtration& f) {
  Json j;
  j["supported"] = f.supported;
  j["status"] = f.status;
  Json steps = Json::array();
  for (const auto& s : f.steps) {
    Json e;
    e["factors"] = s.factors;
    e["rank"] = s.rank;
    e["degree"] = s.degree;
    e["slope"] = s.rank > 0 ? s.degree / s.rank : 0.0;
    e["quotient_rank"] = s.quotient_rank;
    e["quotient_degree"] = s.quotient_degree;
    e["quotient_slope"] = s.quotient_slope;
    steps.push_back(e);
  }
  j["steps"] = steps;
  return j;
}

Json candidate_json(const SubbundleCandidate& c) {
  Json j;
  j["factors"] = c.factors;
  j["rank"] = c.rank;
  j["degree"] = c.degree;
  j["chern_weil_degree"] = c.cw_degree;
  j["slope"] = c.slope;
  j["holomorphic"] = c.holomorphic;
  j["weak_holomorphy"] = c.weak_holomorphy;
  j["origin"] = c.origin;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace folhe
