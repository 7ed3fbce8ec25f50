#pragma once
// Reproduction runs for the ten acceptance checks. Each run returns a
// deterministic details block and separate timings.

#include "folhe/examples.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/report.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace folhe {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  Json details;
  Json timings = Json::object();  // seconds per run; not deterministic
  double seconds = 0.0;
};

// Exactness checks of the form calculus on one model: delbar^2 = del^2 = 0,
// anticommutation, basic Stokes, L/Lambda and P/P^* adjointness.
struct KernelSuiteResult {
  bool pass = false;
  double delbar_squared = 0.0;  // relative to |a| (2 pi N)^2
  double del_squared = 0.0;
  double anticommutator = 0.0;
  double stokes = 0.0;          // worst |int d alpha ^ chi|
  double lefschetz_adjoint = 0.0;  // relative
  double p_adjoint = 0.0;          // relative
  int stokes_samples = 0;
  Json json() const;
};
KernelSuiteResult kernel_suite(const ModelPtr& model, std::uint64_t seed, int stokes_samples = 100);

// exp of a band-limited Hermitian field with pointwise norm about amp,
// restricted to the class blocks of spec.
BasicField random_metric(const BundleSpec& spec, std::mt19937_64& rng, double amp);

struct ReproduceOptions {
  std::uint64_t seed = 1;
  int battery_cutoff = 8;
  SolverOptions solver;
};

class Reproducer {
 public:
  explicit Reproducer(ReproduceOptions opt = {});

  static constexpr int kCount = 10;
  static std::string title(int id);

  CriterionResult run(int id);
  std::vector<CriterionResult> run_all();

  struct BatteryRun {
    BatteryCase bcase;
    std::string stability;
    std::string expected_from_stability;
    PathResult path;
    std::optional<DestabilizerReport> destabilizer;
    double seconds = 0.0;
  };
  // Shared by criteria 4 to 6; computed on first use.
  const std::vector<BatteryRun>& battery_runs();

 private:
  CriterionResult kernel_exactness();
  CriterionResult degree_independence();
  CriterionResult einstein_factor_check();
  CriterionResult dichotomy();
  CriterionResult blowup_estimates();
  CriterionResult destabilizer_quality();
  CriterionResult hn_filtration();
  CriterionResult moduli_certificate();
  CriterionResult instanton_equivalence();
  CriterionResult bogomolov();

  ReproduceOptions opt_;
  std::optional<std::vector<BatteryRun>> battery_;
};

// Report file for one result: {schema, command, version, config, criterion, ...}.
Json criterion_report(const CriterionResult& r, std::uint64_t seed);

}  // namespace folhe
