#include <map>

#include "bsam/config.hpp"
#include "bsam/error.hpp"

namespace bsam {

namespace {

// Checks the exact reductions end to end: rho = 0 makes every two-phase
// optimizer an SGD step, uniform perturbation weights make BSAM equal SAM.
constexpr const char* kReductionSuite = R"(schema_version: 1
name: reduction-suite
output_dir: results/reduction-suite
dataset:
  kind: synthetic
  n_train: 2000
  n_test: 1000
  label_range: [1, 11]
  profile: {kind: exponential, rate: 4.0}
  feature_map: {kind: trig, dim: 4}
  noise_sigma: 0.05
  seed: 17
bins: 20
regions: {many_threshold: 150, few_threshold: 30}
model: {hidden: [16, 16], activation: tanh}
train:
  epochs: 3
  batch_size: 64
  lr: 0.05
  loss: l2
optimizers:
  - {name: sgd, kind: sgd}
  - {name: sam_rho0, kind: sam, rho: 0.0}
  - {name: bsam_rho0, kind: bsam, rho: 0.0, perturbation_weighting: sqinv}
  - {name: imbsam_rho0, kind: imbsam, rho: 0.0}
  - {name: sam, kind: sam, rho: 0.05}
  - {name: bsam_uniform, kind: bsam, rho: 0.05, perturbation_weighting: uniform}
seeds: [0, 1]
metrics: [mae, gm, rmse, delta1, bmae]
results: {deterministic: true, save_checkpoints: false}
)";

// SGD / SQINV / SAM / ImbSAM / BSAM on an exponentially imbalanced
// synthetic set with few-shot sharpness diagnostics.
constexpr const char* kBsamVsBaselines = R"(schema_version: 1
name: bsam-vs-baselines
output_dir: results/bsam-vs-baselines
dataset:
  kind: synthetic
  n_train: 20000
  n_test: 5000
  label_range: [1, 11]
  profile: {kind: exponential, rate: 4.0}
  feature_map: {kind: trig, dim: 4}
  noise_sigma: 0.05
  seed: 2024
bins: 20
regions: {many_threshold: 1500, few_threshold: 300}
model: {hidden: [32, 32], activation: tanh}
train:
  epochs: 20
  batch_size: 256
  lr: 0.05
  schedule: {kind: step, gamma: 0.5, every: 8}
  loss: l2
optimizers:
  - {name: sgd, kind: sgd, update_weighting: none}
  - {name: sgd_sqinv, kind: sgd, update_weighting: sqinv}
  - {name: sam, kind: sam, rho: 0.05, update_weighting: sqinv}
  - {name: imbsam, kind: imbsam, rho: 0.05, update_weighting: sqinv}
  - {name: bsam, kind: bsam, rho: 0.05, perturbation_weighting: sqinv, update_weighting: sqinv}
seeds: [0, 1, 2, 3, 4]
metrics: [mae, gm, rmse, bmae]
sharpness:
  enabled: true
  power_iters: 200
  tol: 1.0e-6
  probes: 30
  subset: few
  split: test
  slice_offsets: [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]
results: {deterministic: true, save_checkpoints: true}
)";

// Neighborhood-size sweep for the two-phase optimizers.
constexpr const char* kRhoAblation = R"(schema_version: 1
name: rho-ablation
output_dir: results/rho-ablation
dataset:
  kind: synthetic
  n_train: 10000
  n_test: 3000
  label_range: [1, 11]
  profile: {kind: exponential, rate: 4.0}
  feature_map: {kind: trig, dim: 4}
  noise_sigma: 0.05
  seed: 7
bins: 20
regions: {many_threshold: 750, few_threshold: 150}
model: {hidden: [32, 32], activation: tanh}
train:
  epochs: 8
  batch_size: 256
  lr: 0.05
  loss: l2
optimizers:
  - {name: sgd_sqinv, kind: sgd, update_weighting: sqinv}
  - {name: sam, kind: sam, rho: [0.05, 0.1, 0.2], update_weighting: sqinv}
  - {name: imbsam, kind: imbsam, rho: [0.05, 0.1, 0.2], update_weighting: sqinv}
  - {name: bsam, kind: bsam, rho: [0.05, 0.1, 0.2], perturbation_weighting: sqinv, update_weighting: sqinv}
seeds: [0]
metrics: [mae, gm, rmse, bmae]
results: {deterministic: true, save_checkpoints: false}
)";

const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> table{
      {"reduction-suite", kReductionSuite},
      {"bsam-vs-baselines", kBsamVsBaselines},
      {"rho-ablation", kRhoAblation},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

std::string preset_config(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

}  // namespace bsam
