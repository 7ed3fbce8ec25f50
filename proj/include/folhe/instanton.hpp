#pragma once
// Omega-instanton residual *F + Omega ^ F with Omega = omega^{n-2}/(n-2)! ^ chi
// and the Yang-Mills residual d_A(*F) for the Chern connection of
// h = h_std(f., .) on flat models with n >= 2. The full Hodge star acts on
// the orthonormal coframe (transverse adapted frame, then leaf directions
// normalized so that chi is the unit leafwise volume).

#include "folhe/bundles.hpp"
#include "folhe/field.hpp"

#include <vector>

namespace folhe {

struct CurvatureForm {
  BasicField f20, f11, f02;  // bidegree components, trace-free when requested
};

// Curvature of the Chern connection of h; optionally minus (tr F / r) Id.
CurvatureForm chern_curvature(const BundleSpec& spec, const BasicField& f, bool trace_free = true);

// Real coefficients on the D-dimensional basis e^A, A a bit mask, with the
// transverse coframe first; per (mode, i, j).
struct RealForm {
  int D = 0, r = 0;
  size_t nmodes = 0;
  std::vector<unsigned> masks;  // distinct masks in use
  std::vector<cd> c;            // [mode][mask slot][i][j]
  double l2_norm(double volume) const;
};

RealForm to_real(const CurvatureForm& F, int D);
RealForm full_hodge_star(const RealForm& a);
// Omega ^ F for Omega = omega^{n-2}/(n-2)! ^ chi.
RealForm omega_wedge(const CurvatureForm& F, int D);

struct InstantonReport {
  double residual = 0.0;       // ||*F + Omega ^ F||_{L2}
  double ym_residual = 0.0;    // ||d_A *F||_{L2}
  double f02_norm = 0.0;       // ||F^{0,2}||
  double mean_curvature = 0.0; // ||i Lambda F_0||
  double trace_norm = 0.0;     // ||tr F|| before projection
  double curvature_norm = 0.0; // ||F_0||
};

InstantonReport instanton_check(const BundleSpec& spec, const BasicField& f = BasicField());
double instanton_residual(const BundleSpec& spec, const BasicField& f = BasicField());
double yang_mills_residual(const BundleSpec& spec, const BasicField& f = BasicField());

}  // namespace folhe
