#pragma once
// INI configuration files: [model], [bundle] with [extensionN] / [hiddenN]
// sections, [solver] parameters and a [run] section tying them together.

#include "folhe/bundles.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/model.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace folhe {

// Malformed or invalid configuration; key() is "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Flat key -> value view of an INI file, in file order per section.
struct ConfigFile {
  std::string path;
  std::vector<std::string> sections;
  std::map<std::string, std::map<std::string, std::string>> values;

  bool has(const std::string& section) const { return values.count(section) > 0; }
};

ConfigFile read_config(const std::string& path);
ConfigFile parse_config(const std::string& text, const std::string& path = "<string>");

ModelParams parse_model(const ConfigFile& cfg);
BundleSpec parse_bundle(const ConfigFile& cfg, const ModelPtr& model);
// Starts from the defaults; only keys present in [solver] are overridden.
SolverOptions parse_solver(const ConfigFile& cfg, SolverOptions base = {});
// Throws ConfigError naming the first offending key.
void validate_solver(const SolverOptions& opt);

struct RunConfig {
  std::string model_path, bundle_path, solver_path;
  std::string out, csv;
  std::uint64_t seed = 1;
  ModelParams model;
  SolverOptions solver;
  std::map<std::string, std::map<std::string, std::string>> echo;  // merged config values
};

// Resolves paths relative to the run file; [run] keys: model, bundle, solver, out, csv, seed.
RunConfig read_run_config(const std::string& path);
// Loads model/bundle/solver files into cfg; [solver] falls back to the bundle
// file, then the model file. Enforces cutoff >= 4.
void load_run_files(RunConfig& cfg);

}  // namespace folhe
