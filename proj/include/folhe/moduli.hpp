#pragma once
// Flat basic U(1) connections d + i(y1 dx1 + y2 dx2 + y3 dx3) on T^3 with a
// linear foliation: gauge and basic-gauge equivalence, transverse classes and
// an exact certificate that basic-gauge compactness fails for irrational
// foliations.

#include "folhe/bundles.hpp"
#include "folhe/lattice.hpp"
#include "folhe/symbolic.hpp"

#include <string>
#include <vector>

namespace folhe {

// yhat - y in Z^3.
bool gauge_equivalent(const SymVec& y, const SymVec& yhat);
// yhat - y = m in Z^3 with m . xi = 0.
bool basic_gauge_equivalent(const SymVec& y, const SymVec& yhat, const SymVec& xi);
// (yhat - y) . xi = 0, i.e. alpha_yhat - alpha_y is basic.
bool same_transverse_structure(const SymVec& y, const SymVec& yhat, const SymVec& xi);

// Integer vectors m with m . xi = 0 (the basic gauge lattice).
std::vector<IntVec> basic_gauge_lattice(const SymVec& xi);

// Unit vector orthogonal to xi with exact components; false when no
// candidate direction has a rational squared norm.
bool exact_unit_normal(const SymVec& xi, SymVec& v);

struct ModuliCertificate {
  std::string status;  // certificate | trivial | compact | rejected
  std::string conclusion;
  SymVec xi;
  std::vector<IntVec> basic_lattice;
  SymVec base, direction;
  std::vector<SymVec> sequence;
  std::vector<double> curvature_norm;  // |F_{y_j}|, identically 0 for constant forms
  bool same_class = false;
  Rational min_pairwise_distance2 = 0;  // exact squared basic-gauge distance
  std::vector<std::vector<Rational>> pairwise_distance2;
  bool no_convergent_subsequence = false;
};

ModuliCertificate noncompactness_certificate(const SymVec& xi, int count, const SymVec& base = {});

// Rank-one BundleSpec for the flat connection alpha_y on a model whose
// foliation is xi; requires y . xi = 0.
BundleSpec flat_line_bundle(const ModelPtr& model, const SymVec& y);

}  // namespace folhe
