#pragma once
// Continuity method for the perturbed Hermitian-Einstein equation
//   L_eps(f) = K_0 - gamma + i Lambda delbar_0(f^{-1} del_0 f) + eps log f = 0
// from eps = 1 towards 0, with Newton-Krylov correction, blow-up detection
// and extraction of a destabilizing projection.

#include "folhe/bundles.hpp"
#include "folhe/field.hpp"

#include <string>
#include <vector>

namespace folhe {

struct SolverOptions {
  double eps_start = 1.0;
  double eps_min = 1e-6;
  double ratio = 0.5;
  double tol = 1e-8;            // extrapolated ||K_h - gamma|| for CONVERGED
  double newton_atol = 1e-10;
  int max_newton = 30;
  int max_halvings = 10;
  double blowup_threshold = 50.0;
  int fit_window = 5;
  int krylov_restart = 80;
  int krylov_max = 1500;
  bool verbose = false;
};

enum class Verdict { Converged, Blowup, Inconclusive };
std::string to_string(Verdict v);

struct StepRecord {
  double eps = 0.0;
  double residual = 0.0;      // L2 norm of f^{1/2} L_eps f^{-1/2}
  double he_residual = 0.0;   // max pointwise |K_h - gamma| (h-adapted)
  double m_eps = 0.0;         // max |log f|
  double log_l2 = 0.0;        // ||log f||_{L2}
  double M_eps = 0.0;         // max largest eigenvalue of log f
  double rho = 0.0;           // e^{-M_eps}
  double max_rho_f = 0.0;     // max eigenvalue of rho f over the grid
  double min_f = 0.0;         // min eigenvalue of f over the grid
  double det_dev = 0.0;       // max |det f - 1|
  double m_bound_gap = 0.0;   // m_eps - max|K^0| / eps
  double estimate_gap = 0.0;  // max of 1/2 P|log f|^2 + eps|log f|^2 - |K^0||log f|
  double estimate_scale = 0.0;
  int newton_iters = 0;
  int krylov_iters = 0;
  int halvings = 0;
};

// Result of the initial gauge shift: the background metric h_0 becomes the
// standard metric of the frame s' = g s.
struct InitialData {
  BundleSpec spec;    // holomorphic structure in the shifted frame
  BasicField phi;     // conformal factor of h_1
  BasicField gauge;   // g = H_0^{1/2}
  BasicField f1;
  double trace_residual = 0.0;  // max |tr K^0_{h_1}|
  double residual = 0.0;        // ||L_1(f1)||
};

InitialData initial_metric(const BundleSpec& spec);

// Precomputed data for a fixed holomorphic structure with background h_std.
class ContinuityProblem {
 public:
  explicit ContinuityProblem(const BundleSpec& spec);

  const BundleSpec& spec() const { return spec_; }
  double gamma() const { return gamma_; }
  const BasicField& k0() const { return k0_; }  // K_std - gamma

  // K_h - gamma for h = h_std(f., .).
  BasicField he_defect(const BasicField& f) const;
  BasicField residual(const BasicField& f, double eps) const;
  // f^{1/2} L_eps(f) f^{-1/2}, Hermitian.
  BasicField scaled_residual(const BasicField& f, double eps) const;
  // eta -> f^{-1/2} dL^[f^{1/2} eta f^{1/2}] f^{-1/2}, L^ = f L_eps.
  BasicField linearization(const BasicField& f, double eps, const BasicField& eta) const;

  struct NewtonResult {
    BasicField f;
    bool ok = false;
    int iterations = 0;
    int krylov_iterations = 0;
    std::vector<double> residuals;
    std::string message;
  };
  // f <- f^{1/2} exp(eta) f^{1/2}; det normalized to one.
  BasicField update(const BasicField& f, const BasicField& eta, bool normalize = true) const;
  // One Newton correction (no line search).
  NewtonResult newton_step(const BasicField& f, double eps, double forcing = 1e-10) const;
  NewtonResult solve(const BasicField& f0, double eps, const SolverOptions& opt) const;

  StepRecord diagnostics(const BasicField& f, double eps) const;
  double newton_atol(const SolverOptions& opt) const;

  // Pointwise Hermitian functions done block by block over the classes.
  GridField metric_function(const GridField& f, double (*fn)(double)) const;
  BasicField log_metric(const BasicField& f) const;
  BasicField exp_metric(const BasicField& x) const;

  struct Lin;
  struct PointEig;

 private:
  Lin prepare(const BasicField& f, double eps) const;
  BasicField step(const Lin& L, const BasicField& eta, double t) const;
  BasicField congruence_update(const PointEig& ef, const GridField& s, const GridField& eg, bool normalize) const;
  BasicField apply(const Lin& lin, const BasicField& eta) const;

  BundleSpec spec_;
  Connection conn_;
  BasicField f11_std_, k0_;
  GridField a10_g_, a01_g_;
  std::vector<std::vector<int>> blocks_;
  double gamma_ = 0.0;
};

struct PathResult {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<StepRecord> history;
  InitialData init;
  BasicField f_final;
  double eps_final = 1.0;
  double extrapolated_residual = -1.0;  // eps -> 0 extrapolation of log f
  double limit_residual = -1.0;         // after a Newton polish at eps = 0
  BasicField limit_metric;
  double final_he_residual = -1.0;
  bool bounded_tail = false;
  std::string message;
};

PathResult trace_path(const BundleSpec& spec, const SolverOptions& opt = {});

struct DestabilizerReport {
  bool ok = false;  // false: INDETERMINATE
  std::string status;
  int rank = 0;
  double rank_defect = 0.0;        // |mean tr pi - rank|
  double threshold = 0.0;
  double gap = 0.0;
  double projection_residual = 0.0;  // max |pi^2 - pi|
  double adjoint_residual = 0.0;     // max |pi - pi^*|
  double trace_deviation = 0.0;      // max |tr pi - s|
  double weak_holomorphy = 0.0;      // ||(Id - pi) delbar_E pi||_{L1}
  double degree = 0.0;
  double slope = 0.0;
  double mu_E = 0.0;
  BasicField pi;
};

// Projection Chern-Weil degree of the subsheaf cut out by pi, taken with the
// standard metric of spec.
double projection_degree(const BundleSpec& spec, const BasicField& pi);
DestabilizerReport extract_destabilizer(const PathResult& path);

}  // namespace folhe
