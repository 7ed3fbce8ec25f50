#include "folhe/bundles.hpp"

#include "folhe/kernel.hpp"
#include "folhe/parallel.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace folhe {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

BasicField omega_power_wedge(const BasicField& a, int power) {
  if (power == 0) return a;
  const int n = a.model()->n();
  return wedge_const(a, forms::const_power(n, forms::kahler_form(n), power));
}

// Pointwise inverse of a general invertible (0,0) field.
BasicField general_inverse(const BasicField& g) {
  GridField gg = to_grid(g);
  FOLHE_PARALLEL_FOR
  for (long pt = 0; pt < static_cast<long>(gg.points); ++pt) {
    Eigen::MatrixXcd m = gg.mat(pt, 0);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    gg.mat(pt, 0) = lu.inverse();
  }
  return from_grid(gg, g.model());
}

BasicField kron_field(const BasicField& a, const Eigen::MatrixXcd& id_right, bool a_left) {
  // a (x) I  or  I (x) a, per mode and component
  const int ra = a.rank();
  const int ri = static_cast<int>(id_right.rows());
  BasicField out(a.model(), a.p(), a.q(), ra * ri);
  for (size_t k = 0; k < a.nmodes(); ++k)
    for (int c = 0; c < a.ncomp(); ++c) {
      Eigen::MatrixXcd blk = a.block(k, c);
      Eigen::MatrixXcd res = Eigen::MatrixXcd::Zero(ra * ri, ra * ri);
      for (int i = 0; i < ra; ++i)
        for (int j = 0; j < ra; ++j) {
          if (blk(i, j) == cd(0.0)) continue;
          for (int s = 0; s < ri; ++s)
            for (int t = 0; t < ri; ++t) {
              if (a_left)
                res(i * ri + s, j * ri + t) = blk(i, j) * id_right(s, t);
              else
                res(s * ra + i, t * ra + j) = blk(i, j) * id_right(s, t);
            }
        }
      out.block(k, c) = res;
    }
  return out;
}

}  // namespace

std::vector<int> BundleSpec::classes() const {
  std::map<std::vector<int>, int> ids;
  std::vector<int> out;
  for (const auto& f : factors) {
    auto it = ids.find(f.c);
    if (it == ids.end()) it = ids.emplace(f.c, static_cast<int>(ids.size())).first;
    out.push_back(it->second);
  }
  return out;
}

BoolMatrix BundleSpec::mask() const {
  auto cls = classes();
  const int r = rank();
  BoolMatrix m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = cls[i] == cls[j];
  return m;
}

void apply_class_mask(const BundleSpec& spec, BasicField& x) { x.apply_mask(spec.mask()); }

LineFactor line(const ModelPtr& model, std::vector<int> c, Eigen::VectorXd y) {
  const int n = model->n();
  if (static_cast<int>(c.size()) != n) throw std::invalid_argument("line: need one Chern number per plane");
  if (y.size() == 0) y = Eigen::VectorXd::Zero(2 * n);
  if (y.size() != 2 * n) throw std::invalid_argument("line: holonomy needs 2n components");
  bool charged = false;
  for (int x : c) charged = charged || x != 0;
  if (charged && !model->full_transverse_lattice())
    throw std::invalid_argument("line: nonzero Chern numbers need a full-rank basic lattice");
  return LineFactor{std::move(c), std::move(y)};
}

LineFactor line1(const ModelPtr& model, int c, double y0, double y1) {
  Eigen::VectorXd y(2);
  y << y0, y1;
  return line(model, {c}, y);
}

forms::ConstForm reference_curvature_form(const ModelPtr& model, const std::vector<int>& c) {
  const int n = model->n();
  forms::ConstForm f;
  f.p = f.q = 1;
  f.c.assign(forms::ncomp(n, 1, 1), cd(0.0));
  // e^{2j} ^ e^{2j+1} = (i/2) zeta^j ^ zetabar^j, normalized by Vol
  for (int j = 0; j < n; ++j)
    f.c[forms::comp_index(n, 1, 1, 1u << j, 1u << j)] = kPi * c[j] / model->volume();
  return f;
}

BundleSpec make_bundle(const ModelPtr& model, const std::vector<LineFactor>& factors,
                       const std::vector<ExtensionTerm>& ext, const std::vector<HiddenTerm>& hidden,
                       const std::string& label) {
  if (factors.empty()) throw std::invalid_argument("bundle: at least one factor is required");
  BundleSpec spec;
  spec.model = model;
  spec.factors = factors;
  spec.label = label;
  const int n = model->n();
  const int r = spec.rank();
  for (const auto& f : factors)
    if (static_cast<int>(f.c.size()) != n || f.y.size() != 2 * n)
      throw std::invalid_argument("bundle: factor shape does not match the model");
  spec.b01 = BasicField(model, 0, 1, r);
  const size_t z = model->modes().zero;
  const Eigen::MatrixXcd& U = model->theta_to_holo();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) {
      cd s = 0.0;
      for (int a = 0; a < 2 * n; ++a) s += factors[i].y(a) * std::conj(U(a, j));
      spec.b01.at(z, j, i, i) = cd(0.0, 2.0 * kPi) * s;
    }
  const auto cls = spec.classes();
  auto check_entry = [&](int row, int col, const IntVec& k, const char* what) {
    if (row < 0 || col < 0 || row >= r || col >= r) throw std::invalid_argument(std::string(what) + ": index out of range");
    if (row >= col) throw std::invalid_argument(std::string(what) + ": entries must be strictly upper triangular");
    if (cls[row] != cls[col])
      throw std::invalid_argument(std::string(what) + ": factors must have equal Chern numbers");
    if (model->modes().find(k) < 0) throw std::invalid_argument(std::string(what) + ": mode not admissible within cutoff");
  };
  for (const auto& t : ext) {
    check_entry(t.row, t.col, t.k, "extension");
    if (t.comp < 0 || t.comp >= n) throw std::invalid_argument("extension: component out of range");
    spec.b01.at(static_cast<size_t>(model->modes().find(t.k)), t.comp, t.row, t.col) += t.coeff;
  }
  if (!hidden.empty()) {
    BasicField g = BasicField::identity(model, r);
    for (const auto& t : hidden) {
      check_entry(t.row, t.col, t.k, "hidden extension");
      g.at(static_cast<size_t>(model->modes().find(t.k)), 0, t.row, t.col) += t.coeff;
    }
    spec.b01 = gauge_transform_b01(spec, g);
  }
  validate_integrable(spec);
  return spec;
}

BasicField gauge_transform_b01(const BundleSpec& spec, const BasicField& g) {
  BasicField ginv = general_inverse(g);
  BasicField out = wedge(wedge(g, spec.b01), ginv) - wedge(delbar(g), ginv);
  apply_class_mask(spec, out);
  return out;
}

void validate_integrable(const BundleSpec& spec, double tol) {
  if (spec.n() < 2) return;
  auto parts = curvature_std(spec);
  const double scale = std::max(1.0, spec.b01.max_coeff());
  if (parts.f02.max_coeff() > tol * scale * scale)
    throw std::invalid_argument("bundle: extension data is not integrable (F^{0,2} != 0)");
}

Connection chern_connection(const BundleSpec& spec) {
  Connection c;
  c.a01 = spec.b01;
  c.a10 = spec.b01.adjoint();
  c.a10 *= -1.0;
  return c;
}

BasicField graded_commutator(const BasicField& a, const BasicField& x) {
  const int da = a.p() + a.q(), dx = x.p() + x.q();
  BasicField out = wedge(a, x);
  BasicField rev = wedge(x, a);
  const double s = ((da * dx) % 2) ? -1.0 : 1.0;
  out -= rev * cd(s);
  return out;
}

BasicField del_E(const Connection& conn, const BasicField& x) { return del(x) + graded_commutator(conn.a10, x); }

BasicField delbar_E(const Connection& conn, const BasicField& x) {
  return delbar(x) + graded_commutator(conn.a01, x);
}

BasicField p_operator_E(const Connection& conn, const BasicField& x) {
  BasicField out = contract(delbar_E(conn, del_E(conn, x)));
  out *= cd(0.0, 1.0);
  return out;
}

CurvatureParts curvature_std(const BundleSpec& spec) {
  const ModelPtr& model = spec.model;
  const int n = model->n();
  const int r = spec.rank();
  Connection conn = chern_connection(spec);
  CurvatureParts parts;
  BasicField ref(model, 1, 1, r);
  const size_t z = model->modes().zero;
  for (int i = 0; i < r; ++i) {
    auto fc = reference_curvature_form(model, spec.factors[i].c);
    for (int c = 0; c < ref.ncomp(); ++c) ref.at(z, c, i, i) = fc.c[c];
  }
  parts.f11 = ref + delbar(conn.a10) + del(conn.a01) + wedge(conn.a10, conn.a01) + wedge(conn.a01, conn.a10);
  apply_class_mask(spec, parts.f11);
  if (n >= 2) {
    parts.f20 = del(conn.a10) + wedge(conn.a10, conn.a10);
    parts.f02 = delbar(conn.a01) + wedge(conn.a01, conn.a01);
    apply_class_mask(spec, parts.f20);
    apply_class_mask(spec, parts.f02);
  }
  return parts;
}

BasicField curvature(const BundleSpec& spec, const Connection& conn, const BasicField& f11_std,
                     const BasicField& f) {
  BasicField finv = hermitian_function(f, [](double x) { return 1.0 / x; });
  BasicField x = wedge(finv, del_E(conn, f));
  BasicField out = f11_std + delbar_E(conn, x);
  apply_class_mask(spec, out);
  return out;
}

BasicField curvature(const BundleSpec& spec, const BasicField& f) {
  if (f.rank() != spec.rank() || f.p() != 0 || f.q() != 0)
    throw std::invalid_argument("curvature: metric must be a rank-r (0,0) field");
  return curvature(spec, chern_connection(spec), curvature_std(spec).f11, f);
}

BasicField mean_curvature(const BundleSpec& spec, const BasicField& f) {
  BasicField k = contract(curvature(spec, f));
  k *= cd(0.0, 1.0);
  return k;
}

BasicField mean_curvature_std(const BundleSpec& spec) {
  BasicField k = contract(curvature_std(spec).f11);
  k *= cd(0.0, 1.0);
  return k;
}

double degree(const BundleSpec& spec, const BasicField& f) {
  const int n = spec.n();
  BasicField tr = curvature(spec, f).trace();
  cd v = integrate(omega_power_wedge(tr, n - 1)) * cd(0.0, 1.0 / (2.0 * kPi));
  return v.real();
}

double degree(const BundleSpec& spec) { return degree(spec, BasicField::identity(spec.model, spec.rank())); }

double degree_closed_form(const BundleSpec& spec) {
  long s = 0;
  for (const auto& f : spec.factors)
    for (int c : f.c) s += c;
  return factorial(spec.n() - 1) * static_cast<double>(s);
}

double slope(const BundleSpec& spec) { return degree(spec) / spec.rank(); }

double einstein_factor(const BundleSpec& spec) {
  return 2.0 * kPi * slope(spec) / (factorial(spec.n() - 1) * spec.model->volume());
}

ChernForms chern_forms(const BundleSpec& spec, const BasicField& f) {
  const int n = spec.n();
  BasicField F = curvature(spec, f);
  BasicField trF = F.trace();
  ChernForms out;
  out.c1 = trF * cd(0.0, 1.0 / (2.0 * kPi));
  if (n >= 2) {
    BasicField ff = wedge(F, F).trace();
    ff -= wedge(trF, trF);
    out.c2 = ff * cd(1.0 / (8.0 * kPi * kPi));
  }
  return out;
}

double bogomolov_integral(const BundleSpec& spec, const BasicField& f) {
  const int n = spec.n();
  if (n < 2) throw std::invalid_argument("bogomolov_integral: needs n >= 2");
  const int r = spec.rank();
  ChernForms cf = chern_forms(spec, f);
  BasicField integrand = cf.c2 * cd(2.0 * r);
  integrand -= wedge(cf.c1, cf.c1) * cd(r - 1.0);
  cd v = integrate(omega_power_wedge(integrand, n - 2));
  return v.real();
}

BundleSpec dual(const BundleSpec& e) {
  BundleSpec out;
  out.model = e.model;
  out.label = e.label.empty() ? "" : "dual(" + e.label + ")";
  const int r = e.rank();
  for (int i = r - 1; i >= 0; --i) {
    LineFactor f = e.factors[i];
    for (auto& c : f.c) c = -c;
    f.y = -f.y;
    out.factors.push_back(f);
  }
  out.b01 = BasicField(e.model, 0, 1, r);
  for (size_t k = 0; k < e.b01.nmodes(); ++k)
    for (int c = 0; c < e.b01.ncomp(); ++c)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) out.b01.at(k, c, r - 1 - j, r - 1 - i) = -e.b01.at(k, c, i, j);
  return out;
}

BundleSpec tensor(const BundleSpec& e, const BundleSpec& f) {
  if (e.model != f.model) throw std::invalid_argument("tensor: model mismatch");
  BundleSpec out;
  out.model = e.model;
  out.label = (e.label.empty() || f.label.empty()) ? "" : e.label + "(x)" + f.label;
  for (const auto& a : e.factors)
    for (const auto& b : f.factors) {
      LineFactor t = a;
      for (size_t j = 0; j < t.c.size(); ++j) t.c[j] += b.c[j];
      t.y += b.y;
      out.factors.push_back(t);
    }
  out.b01 = kron_field(e.b01, Eigen::MatrixXcd::Identity(f.rank(), f.rank()), true) +
            kron_field(f.b01, Eigen::MatrixXcd::Identity(e.rank(), e.rank()), false);
  apply_class_mask(out, out.b01);
  return out;
}

BundleSpec direct_sum(const std::vector<BundleSpec>& parts) {
  if (parts.empty()) throw std::invalid_argument("direct_sum: nothing to sum");
  BundleSpec out;
  out.model = parts[0].model;
  int r = 0;
  for (const auto& p : parts) {
    if (p.model != out.model) throw std::invalid_argument("direct_sum: model mismatch");
    r += p.rank();
    for (const auto& f : p.factors) out.factors.push_back(f);
    out.label += (out.label.empty() ? "" : "+") + p.label;
  }
  out.b01 = BasicField(out.model, 0, 1, r);
  int off = 0;
  for (const auto& p : parts) {
    for (size_t k = 0; k < p.b01.nmodes(); ++k)
      for (int c = 0; c < p.b01.ncomp(); ++c) out.b01.block(k, c).block(off, off, p.rank(), p.rank()) = p.b01.block(k, c);
    off += p.rank();
  }
  return out;
}

}  // namespace folhe
