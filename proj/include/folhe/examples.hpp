#pragma once
// Named example bundles shared by the tests, the CLI and the reproduction runs.

#include "folhe/bundles.hpp"

#include <string>
#include <vector>

namespace folhe {

struct BatteryCase {
  std::string name;
  BundleSpec spec;
  std::string expected_path;       // CONVERGED / BLOWUP / INCONCLUSIVE
  std::string expected_stability;  // stable / polystable-not-stable / semistable-not-polystable / unstable
};

// Rank <= 3 bundles over an n = 1 model covering every branch of the dichotomy.
std::vector<BatteryCase> battery(const ModelPtr& model);

// Non-split extension 0 -> L(c) -> E -> L(c) -> 0 by a constant (0,1) class.
BundleSpec extension_bundle(const ModelPtr& model, int c, cd coeff = cd(0.5, 0.0));
// L(0) + L(0) with a gauge-trivial off-diagonal term e^{2 pi i k.x}.
BundleSpec hidden_extension_bundle(const ModelPtr& model, cd coeff = cd(0.03, 0.0));
// n = 2: L(1,-1) + L(1,-1) + L(-2,2) with a gauge-trivial term on the first
// block; trivial determinant.
BundleSpec hidden_sl3_bundle(const ModelPtr& model, cd coeff = cd(0.02, 0.0));
// Sum of line bundles with the given per-plane Chern numbers.
BundleSpec line_sum(const ModelPtr& model, const std::vector<std::vector<int>>& classes, const std::string& label = "");

}  // namespace folhe
