#include "folhe/moduli.hpp"

#include <numbers>
#include <stdexcept>

namespace folhe {

namespace {

SymVec diff(const SymVec& a, const SymVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("moduli: dimension mismatch");
  SymVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool integral(const SymVec& v, IntVec* m = nullptr) {
  IntVec out;
  for (const auto& x : v) {
    if (!x.is_integer()) return false;
    out.push_back(static_cast<long long>(numerator(x.rational_part())));
  }
  if (m) *m = out;
  return true;
}

SymVec scaled(const SymVec& v, const SymReal& s) {
  SymVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * s;
  return out;
}

SymVec axpy(const SymVec& y, long long j, const SymVec& v) {
  SymVec out = y;
  for (size_t i = 0; i < y.size(); ++i) out[i] += SymReal(j) * v[i];
  return out;
}

}  // namespace

bool gauge_equivalent(const SymVec& y, const SymVec& yhat) { return integral(diff(yhat, y)); }

bool basic_gauge_equivalent(const SymVec& y, const SymVec& yhat, const SymVec& xi) {
  IntVec m;
  if (!integral(diff(yhat, y), &m)) return false;
  return annihilates(m, {xi});
}

bool same_transverse_structure(const SymVec& y, const SymVec& yhat, const SymVec& xi) {
  return dot(diff(yhat, y), xi).is_zero();
}

std::vector<IntVec> basic_gauge_lattice(const SymVec& xi) {
  auto basis = integer_kernel(relation_rows({xi}), static_cast<int>(xi.size()));
  reduce_basis(basis);
  return basis;
}

bool exact_unit_normal(const SymVec& xi, SymVec& v) {
  if (xi.size() != 3) throw std::invalid_argument("moduli: xi must have three components");
  // e_a x xi for a = 0, 1, 2
  const std::vector<SymVec> cands = {
      {SymReal(0), -xi[2], xi[1]}, {xi[2], SymReal(0), -xi[0]}, {-xi[1], xi[0], SymReal(0)}};
  for (const auto& w : cands) {
    const SymReal n2 = dot(w, w);
    if (n2.is_zero() || !n2.is_rational()) continue;
    SymReal root;
    if (!n2.try_sqrt(root)) continue;
    // 1 / sqrt(q) = sqrt(q) / q
    v = scaled(w, root.div(n2.rational_part()));
    return true;
  }
  return false;
}

ModuliCertificate noncompactness_certificate(const SymVec& xi, int count, const SymVec& base) {
  ModuliCertificate c;
  c.xi = xi;
  if (xi.size() != 3) throw std::invalid_argument("moduli: xi must have three components");
  if (count < 1) throw std::invalid_argument("moduli: count must be positive");
  c.base = base.empty() ? SymVec(3, SymReal(0)) : base;
  c.basic_lattice = basic_gauge_lattice(xi);
  const int rank = static_cast<int>(c.basic_lattice.size());
  if (rank == 2) {
    c.status = "compact";
    c.conclusion =
        "basic gauge lattice has rank 2 inside the transverse plane; the moduli of a transverse class is the "
        "compact dual torus T^2 and no certificate exists";
    return c;
  }
  if (rank != 0) {
    c.status = "rejected";
    c.conclusion = "xi is rationally dependent (basic gauge lattice of rank " + std::to_string(rank) + ")";
    return c;
  }
  if (!exact_unit_normal(xi, c.direction)) {
    c.status = "rejected";
    c.conclusion = "no exactly normalizable direction orthogonal to xi";
    return c;
  }
  for (int j = 0; j < count; ++j) {
    c.sequence.push_back(axpy(c.base, j, c.direction));
    c.curvature_norm.push_back(0.0);
  }
  c.same_class = true;
  for (const auto& y : c.sequence) c.same_class = c.same_class && same_transverse_structure(c.base, y, xi);
  if (count == 1) {
    c.status = "trivial";
    c.conclusion = "a single connection is trivially bounded; nothing to certify";
    return c;
  }
  // The basic gauge lattice is trivial, so the basic-gauge distance is the
  // Euclidean distance of the representatives.
  c.pairwise_distance2.assign(count, std::vector<Rational>(count, Rational(0)));
  bool first = true;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      if (i == j) continue;
      const SymVec d = diff(c.sequence[i], c.sequence[j]);
      const SymReal d2 = dot(d, d);
      if (!d2.is_rational()) throw std::logic_error("moduli: squared distance is not rational");
      c.pairwise_distance2[i][j] = d2.rational_part();
      if (first || d2.rational_part() < c.min_pairwise_distance2) c.min_pairwise_distance2 = d2.rational_part();
      first = false;
    }
  c.no_convergent_subsequence = c.same_class && c.min_pairwise_distance2 >= 1;
  c.status = c.no_convergent_subsequence ? "certificate" : "rejected";
  c.conclusion = c.no_convergent_subsequence
                     ? "flat connections in one transverse class with pairwise basic-gauge distance >= 1: no "
                       "subsequence converges modulo basic gauge"
                     : "construction failed";
  return c;
}

BundleSpec flat_line_bundle(const ModelPtr& model, const SymVec& y) {
  if (model->n() != 1 || model->d() != 3 || model->m() != 1)
    throw std::invalid_argument("flat_line_bundle: needs a codimension-2 foliation of T^3");
  if (!dot(y, model->params().xi[0]).is_zero())
    throw std::invalid_argument("flat_line_bundle: alpha_y is not basic (y . xi != 0)");
  // y = theta^T kappa; the line factor carries kappa / (2 pi)
  const auto yv = values(y);
  Eigen::Vector3d yd(yv[0], yv[1], yv[2]);
  Eigen::VectorXd kappa = model->theta().transpose().colPivHouseholderQr().solve(yd);
  LineFactor f = line1(model, 0, kappa(0) / (2.0 * std::numbers::pi), kappa(1) / (2.0 * std::numbers::pi));
  return make_bundle(model, {f}, {}, {}, "flat line");
}

}  // namespace folhe
