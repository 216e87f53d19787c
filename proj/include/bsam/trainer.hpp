#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsam/datagen.hpp"
#include "bsam/imbalance.hpp"
#include "bsam/metrics.hpp"
#include "bsam/optimizers.hpp"

namespace bsam {

struct LrSchedule {
  enum class Kind { Constant, StepDecay };
  Kind kind = Kind::Constant;
  double gamma = 1.0;
  std::size_t every = 1;

  // base * gamma^floor(epoch / every) for StepDecay.
  double rate(double base, std::size_t epoch) const;
};

struct TrainPlan {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  LrSchedule schedule;
  std::uint64_t shuffle_seed = 0;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  PerturbationSpec perturbation;
  LossKind loss = LossKind::L2;
  // Weighting of the update (phase-b) objective; Uniform means unweighted.
  WeightMode update_weighting = WeightMode::Uniform;
  bool normalize_weights = true;
  double weight_decay = 0.0;
  bool validate_each_epoch = false;
  std::vector<Metric> metrics = default_metrics();

  void validate(std::size_t n_train) const;
};

// Label statistics of the training set, computed once before training.
struct TrainContext {
  const LabelHistogram* hist = nullptr;
  const WeightTable* perturbation_weights = nullptr;  // BSAM
  const RegionMap* regions = nullptr;                 // ImbSAM, validation reports
};

struct TrainTrace {
  std::vector<double> epoch_loss;
  std::vector<RegionReport> validation;
  std::vector<double> final_params;
  double wall_seconds = 0.0;
  std::size_t batches = 0;
  std::size_t backward_passes = 0;
};

// Batches of one epoch: a seeded permutation of [0, n) cut into chunks of
// `batch_size`; the last chunk may be short.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch);

// Runs the mini-batch loop: one optimizer step per batch, fixed number of
// epochs. Throws DivergedError after three consecutive non-finite losses.
TrainTrace train(const TrainPlan& plan, MlpModel& model, const RegressionDataset& train_set,
                 const RegressionDataset* validation_set, const TrainContext& context);

std::vector<double> predict(const MlpModel& model, const Tensor& features);

nlohmann::json checkpoint_json(const MlpModel& model, const nlohmann::json& provenance);
MlpModel model_from_checkpoint(const nlohmann::json& j);

}  // namespace bsam
