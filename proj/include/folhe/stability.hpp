#pragma once
// Slopes of subbundles by projection Chern-Weil, stability verdicts for
// iterated extensions of line bundles over n = 1 models, holomorphic section
// counts, and Jordan-Hoelder / Harder-Narasimhan filtrations.

#include "folhe/bundles.hpp"
#include "folhe/field.hpp"

#include <string>
#include <vector>

namespace folhe {

struct SubbundleCandidate {
  std::vector<int> factors;  // coordinate sub-sum of the factor list
  BasicField pi;
  int rank = 0;
  double degree = 0.0;     // closed form from the Chern numbers
  double cw_degree = 0.0;  // projection Chern-Weil value
  double slope = 0.0;
  bool holomorphic = false;     // delbar_E-invariant
  double weak_holomorphy = 0.0; // ||(Id - pi) delbar_E pi||_{L2}
  std::string origin;           // "sub-sum" | "extension kernel" | "destabilizer"
};

// Degree of the subsheaf cut out by pi (h-orthogonal for h = h_std(f., .))
// divided by its rank. Throws when tr pi is not within 1e-3 of an integer.
double subbundle_degree(const BundleSpec& spec, const BasicField& f, const BasicField& pi, int* rank = nullptr);
double subbundle_slope(const BundleSpec& spec, const BasicField& f, const BasicField& pi);

// Every proper non-empty coordinate sub-sum, with invariance and degrees.
std::vector<SubbundleCandidate> enumerate_subobjects(const BundleSpec& spec);

// Kernel of X -> delbar X + b_left X - X b_right on Hom-valued (0,0) fields,
// b_left: (0,1) of rank rl, b_right: (0,1) of rank rr (empty: zero, rank 1).
struct KernelReport {
  int dim = 0;
  double threshold = 0.0;
  double gap = 0.0;             // smallest singular value above the threshold
  double largest_kernel = 0.0;  // largest singular value counted as kernel
  std::vector<BasicField> basis;  // rl x rr data stored in rank max(rl, rr) fields
};
KernelReport delbar_kernel(const ModelPtr& model, const BasicField& b_left, const BasicField& b_right, int rl, int rr,
                           bool want_basis = false, double threshold = 1e-7);

// Restriction of an End-valued field to the index set idx (rank idx.size()).
BasicField sub_block(const BasicField& a, const std::vector<int>& idx);

struct StabilityReport {
  std::string verdict;  // stable | semistable-not-polystable | polystable-not-stable | unstable | UNSUPPORTED
  std::string message;
  double mu = 0.0;
  double max_sub_slope = 0.0;
  int end_dim = 0;         // dim H^0(End E)
  int end_dim_graded = 0;  // same for the split bundle with equal factors
  double kernel_gap = 0.0;
  std::vector<SubbundleCandidate> candidates;
};
StabilityReport stability_verdict(const BundleSpec& spec);

struct VanishingClass {
  std::vector<int> c;
  int rank = 0;
  double degree = 0.0;
  std::string method;  // fourier-svd | weitzenbock | riemann-roch | not computed
  int dim = -1;
  double gap = 0.0;
  double max_covariant_derivative = 0.0;
};
struct VanishingReport {
  bool ok = true;
  int total_dim = 0;
  std::vector<VanishingClass> classes;
  std::string message;
};
// Holomorphic sections of E; with a metric f, degree-0 sections are checked
// to be covariantly constant for h = h_std(f., .).
VanishingReport vanishing_check(const BundleSpec& spec, const BasicField& f = BasicField());

struct FiltrationStep {
  std::vector<int> factors;  // E_i as a coordinate sub-sum
  int rank = 0;
  double degree = 0.0;
  int quotient_rank = 0;
  double quotient_degree = 0.0;
  double quotient_slope = 0.0;
};
struct Filtration {
  bool supported = false;
  std::string status;
  std::vector<FiltrationStep> steps;  // E_1 subset ... subset E_k = E
};
Filtration harder_narasimhan(const BundleSpec& spec);
Filtration jordan_holder(const BundleSpec& spec);

}  // namespace folhe
