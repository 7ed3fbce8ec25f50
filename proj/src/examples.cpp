#include "folhe/examples.hpp"

#include <stdexcept>

namespace folhe {

namespace {

IntVec zero_mode(const ModelPtr& model) { return IntVec(model->d(), 0); }

IntVec first_nonzero_mode(const ModelPtr& model) {
  const auto& basis = model->lattice_basis();
  if (basis.size() < 2) throw std::invalid_argument("examples: model needs two transverse lattice directions");
  IntVec k(model->d(), 0);
  for (int i = 0; i < model->d(); ++i) k[i] = basis[0][i] - basis[1][i];
  return k;
}

}  // namespace

BundleSpec extension_bundle(const ModelPtr& model, int c, cd coeff) {
  ExtensionTerm e{0, 1, zero_mode(model), 0, coeff};
  return make_bundle(model, {line1(model, c), line1(model, c)}, {e}, {}, "Ext(L" + std::to_string(c) + ",L" +
                                                                              std::to_string(c) + ")");
}

BundleSpec hidden_extension_bundle(const ModelPtr& model, cd coeff) {
  HiddenTerm h{0, 1, first_nonzero_mode(model), coeff};
  return make_bundle(model, {line1(model, 0), line1(model, 0)}, {}, {h}, "hidden L0+L0");
}

BundleSpec hidden_sl3_bundle(const ModelPtr& model, cd coeff) {
  if (model->n() != 2) throw std::invalid_argument("hidden_sl3_bundle: needs an n = 2 model");
  const auto& b = model->lattice_basis();
  IntVec k(model->d(), 0);
  for (int i = 0; i < model->d(); ++i) k[i] = b[0][i] + b[2][i];
  HiddenTerm h{0, 1, k, coeff};
  return make_bundle(model, {line(model, {1, -1}), line(model, {1, -1}), line(model, {-2, 2})}, {}, {h},
                     "hidden sl3");
}

BundleSpec line_sum(const ModelPtr& model, const std::vector<std::vector<int>>& classes, const std::string& label) {
  std::vector<LineFactor> f;
  for (const auto& c : classes) f.push_back(line(model, c));
  return make_bundle(model, f, {}, {}, label);
}

std::vector<BatteryCase> battery(const ModelPtr& m) {
  if (m->n() != 1) throw std::invalid_argument("battery: needs an n = 1 model");
  auto sum = [&](std::vector<int> cs, const std::string& name) {
    std::vector<LineFactor> f;
    for (int c : cs) f.push_back(line1(m, c));
    return make_bundle(m, f, {}, {}, name);
  };
  std::vector<BatteryCase> out;
  out.push_back({"L0+L0", sum({0, 0}, "L0+L0"), "CONVERGED", "polystable-not-stable"});
  out.push_back({"L1+L1", sum({1, 1}, "L1+L1"), "CONVERGED", "polystable-not-stable"});
  out.push_back({"L1+L1+L1", sum({1, 1, 1}, "L1+L1+L1"), "CONVERGED", "polystable-not-stable"});
  out.push_back({"L0(y1)+L0(y2)",
                 make_bundle(m, {line1(m, 0, 0.25, 0.0), line1(m, 0, 0.0, 0.4)}, {}, {}, "L0(y1)+L0(y2)"),
                 "CONVERGED", "polystable-not-stable"});
  out.push_back({"hidden L0+L0", hidden_extension_bundle(m), "CONVERGED", "polystable-not-stable"});
  out.push_back({"L1+L0", sum({1, 0}, "L1+L0"), "BLOWUP", "unstable"});
  out.push_back({"L2+L(-1)", sum({2, -1}, "L2+L(-1)"), "BLOWUP", "unstable"});
  out.push_back({"L1+L0+L0", sum({1, 0, 0}, "L1+L0+L0"), "BLOWUP", "unstable"});
  out.push_back({"Ext(L0,L0)+L1", direct_sum({extension_bundle(m, 0), sum({1}, "L1")}), "BLOWUP", "unstable"});
  out.push_back({"Ext(L1,L1)+L(-1)", direct_sum({extension_bundle(m, 1), sum({-1}, "L(-1)")}), "BLOWUP",
                 "unstable"});
  out.push_back({"Ext(L0,L0)", extension_bundle(m, 0), "INCONCLUSIVE", "semistable-not-polystable"});
  for (auto& c : out) c.spec.label = c.name;
  return out;
}

}  // namespace folhe
