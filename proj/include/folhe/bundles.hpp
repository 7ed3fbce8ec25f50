#pragma once
// Foliated Hermitian bundles built from constant-curvature line bundles and
// extension data, with the Chern connection of the standard fibre metric and
// the curvature, degree and Chern forms of metrics h = h_std(f., .).

#include "folhe/field.hpp"
#include "folhe/forms.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace folhe {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Line bundle with per-plane Chern numbers c (length n) and transverse
// holonomy y (length 2n, coordinates in the theta coframe).
struct LineFactor {
  std::vector<int> c;
  Eigen::VectorXd y;
};

// beta(row, col) += coeff e^{2 pi i k.x} zetabar^comp
struct ExtensionTerm {
  int row = 0, col = 0;
  IntVec k;
  int comp = 0;
  cd coeff = 0.0;
};

// u(row, col) += coeff e^{2 pi i k.x}; beta += delbar_E u (gauge-trivial data).
struct HiddenTerm {
  int row = 0, col = 0;
  IntVec k;
  cd coeff = 0.0;
};

// Holomorphic structure delbar_E = delbar_ref + b01 on the sum of the factors.
// Endomorphism fields live on the blocks between factors of equal Chern
// numbers; blocks between different classes vanish identically.
struct BundleSpec {
  ModelPtr model;
  std::vector<LineFactor> factors;
  BasicField b01;  // (0,1), rank r
  std::string label;

  int rank() const { return static_cast<int>(factors.size()); }
  int n() const { return model->n(); }
  // class id per factor (equal Chern numbers share a class)
  std::vector<int> classes() const;
  BoolMatrix mask() const;
};

BundleSpec make_bundle(const ModelPtr& model, const std::vector<LineFactor>& factors,
                       const std::vector<ExtensionTerm>& ext = {}, const std::vector<HiddenTerm>& hidden = {},
                       const std::string& label = "");
LineFactor line(const ModelPtr& model, std::vector<int> c, Eigen::VectorXd y = Eigen::VectorXd());
// Convenience for n = 1.
LineFactor line1(const ModelPtr& model, int c, double y0 = 0.0, double y1 = 0.0);

// Holomorphic structure in the frame s' = g s: g b01 g^{-1} - (delbar g) g^{-1}.
BasicField gauge_transform_b01(const BundleSpec& spec, const BasicField& g);

// Throws if the (0,2) part of the curvature is not zero (n >= 2).
void validate_integrable(const BundleSpec& spec, double tol = 1e-10);

// Constant curvature -2 pi i sum_j c_j (normalized area form of plane j).
forms::ConstForm reference_curvature_form(const ModelPtr& model, const std::vector<int>& c);

struct Connection {
  BasicField a10, a01;  // Chern connection of the standard metric, minus the reference part
};
Connection chern_connection(const BundleSpec& spec);

// Graded commutator [a, x] = a^x - (-1)^{|a||x|} x^a.
BasicField graded_commutator(const BasicField& a, const BasicField& x);
BasicField del_E(const Connection& conn, const BasicField& x);
BasicField delbar_E(const Connection& conn, const BasicField& x);
// P_End(x) = i Lambda delbar_E del_E x.
BasicField p_operator_E(const Connection& conn, const BasicField& x);

struct CurvatureParts {
  BasicField f20, f11, f02;  // f20/f02 empty() for n = 1
};
// Full curvature of the Chern connection of the standard metric.
CurvatureParts curvature_std(const BundleSpec& spec);
// Curvature of h = h_std(f., .): F_0 + delbar_0(f^{-1} del_0 f).
BasicField curvature(const BundleSpec& spec, const BasicField& f);
// Same, from an explicit connection (used after gauge changes).
BasicField curvature(const BundleSpec& spec, const Connection& conn, const BasicField& f11_std, const BasicField& f);
BasicField mean_curvature(const BundleSpec& spec, const BasicField& f);
BasicField mean_curvature_std(const BundleSpec& spec);

// (i/2pi) int tr(F_h) ^ omega^{n-1} ^ chi
double degree(const BundleSpec& spec, const BasicField& f);
double degree(const BundleSpec& spec);
// (n-1)! sum over factors of sum_j c_j
double degree_closed_form(const BundleSpec& spec);
double slope(const BundleSpec& spec);
double einstein_factor(const BundleSpec& spec);

struct ChernForms {
  BasicField c1;  // (1,1)
  BasicField c2;  // (2,2); empty() for n = 1
};
ChernForms chern_forms(const BundleSpec& spec, const BasicField& f);
// int (2r c2 - (r-1) c1^2) ^ omega^{n-2} ^ chi; requires n >= 2.
double bogomolov_integral(const BundleSpec& spec, const BasicField& f);

BundleSpec dual(const BundleSpec& e);
BundleSpec tensor(const BundleSpec& e, const BundleSpec& f);
BundleSpec direct_sum(const std::vector<BundleSpec>& parts);

// Hermitian field restricted to the class blocks of spec.
void apply_class_mask(const BundleSpec& spec, BasicField& x);

}  // namespace folhe
