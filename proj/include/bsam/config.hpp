#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsam/datagen.hpp"
#include "bsam/imbalance.hpp"
#include "bsam/metrics.hpp"
#include "bsam/model.hpp"
#include "bsam/optimizers.hpp"
#include "bsam/sharpness.hpp"
#include "bsam/trainer.hpp"

namespace bsam {

inline constexpr int kSchemaVersion = 1;

struct DatasetConfig {
  // Synthetic data unless train_csv is set.
  DatasetSpec synthetic;
  bool vary_with_seed = true;  // derive the data seed from the run seed
  std::string train_csv;
  std::string test_csv;
  std::string label_column = "y";
  std::optional<std::pair<double, double>> label_range;

  bool from_csv() const { return !train_csv.empty(); }
};

struct OptimizerEntry {
  std::string name;
  OptimizerKind kind = OptimizerKind::Sgd;
  std::vector<double> rhos{0.0};
  double p = 2.0;
  WeightMode perturbation_weighting = WeightMode::Sqinv;  // BSAM only
  WeightMode update_weighting = WeightMode::Uniform;
};

struct SharpnessConfig {
  bool enabled = false;
  std::size_t power_iters = 200;
  double tol = 1e-6;
  std::size_t probes = 100;
  std::string subset = "few";  // all | many | medium | few
  std::string split = "test";  // test | train
  std::vector<double> slice_offsets;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  DatasetConfig dataset;
  std::size_t bins = 20;
  std::size_t many_threshold = 1500;
  std::size_t few_threshold = 300;
  bool normalize_weights = true;
  std::vector<std::size_t> hidden{32, 32};
  Activation activation = Activation::Tanh;
  TrainPlan plan;  // optimizer fields are filled per cell
  std::vector<OptimizerEntry> optimizers;
  std::vector<std::uint64_t> seeds{0};
  std::vector<Metric> metrics = default_metrics();
  SharpnessConfig sharpness;
  std::string output_dir = "results";
  // Suppresses the timestamp header line and wall-clock columns so that
  // reruns produce byte-identical results.csv files.
  bool deterministic = true;
  bool save_checkpoints = true;

  void validate() const;
};

// Parses the YAML experiment file format; errors name the field and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
// YAML text of a named preset.
std::string preset_config(const std::string& name);

}  // namespace bsam
