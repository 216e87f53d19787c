#include "bsam/trainer.hpp"

#include <chrono>
#include <cmath>
#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "bsam/random.hpp"

namespace bsam {

double LrSchedule::rate(double base, std::size_t epoch) const {
  if (kind == Kind::Constant) return base;
  return base * std::pow(gamma, static_cast<double>(epoch / every));
}

void TrainPlan::validate(std::size_t n_train) const {
  if (epochs == 0) throw ContractError("train plan needs epochs >= 1");
  if (batch_size == 0 || batch_size > n_train) {
    throw ContractError("batch size must be in [1, " + std::to_string(n_train) + "]");
  }
  if (!(learning_rate >= 0.0)) throw ContractError("learning rate must be non-negative");
  if (schedule.kind == LrSchedule::Kind::StepDecay && schedule.every == 0) {
    throw ContractError("step decay needs every >= 1");
  }
  if (!(weight_decay >= 0.0)) throw ContractError("weight decay must be non-negative");
  perturbation.validate();
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::vector<double> predict(const MlpModel& model, const Tensor& features) {
  return forward(model, features).data;
}

TrainTrace train(const TrainPlan& plan, MlpModel& model, const RegressionDataset& train_set,
                 const RegressionDataset* validation_set, const TrainContext& context) {
  plan.validate(train_set.size());
  if (!context.hist) throw ContractError("training needs the label histogram of the training set");
  const LabelHistogram& hist = *context.hist;
  if (hist.total() != train_set.size()) throw ContractError("histogram was not built from this training set");

  WeightTable update_table;
  const bool weighted_update = plan.update_weighting != WeightMode::Uniform;
  if (weighted_update) update_table = compute_weights(hist, plan.update_weighting, plan.normalize_weights);
  const Optimizer optimizer(plan.optimizer, plan.perturbation, &hist, context.perturbation_weights, context.regions);

  const auto start = std::chrono::steady_clock::now();
  OptimizerState state;
  state.weight_decay = plan.weight_decay;
  TrainTrace trace;
  std::size_t consecutive_failures = 0;

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    state.learning_rate = plan.schedule.rate(plan.learning_rate, epoch);
    const auto batches = epoch_batches(train_set.size(), plan.batch_size, plan.shuffle_seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const RegressionDataset rows = train_set.subset(batches[b]);
      Batch batch{rows.features, rows.labels, {}};
      if (weighted_update) batch.update_weights = sample_weights(hist, update_table, batch.labels);
      try {
        const double loss = optimizer.step(model, batch, plan.loss, state);
        loss_sum += loss * static_cast<double>(batch.size());
        consecutive_failures = 0;
      } catch (const NumericError& e) {
        loss_sum = std::numeric_limits<double>::quiet_NaN();
        if (++consecutive_failures == 3) {
          throw DivergedError("training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                                  ": " + e.what(),
                              epoch, b);
        }
      }
      ++trace.batches;
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(train_set.size()));
    if (plan.validate_each_epoch && validation_set) {
      if (!context.regions) throw ContractError("validation reports need a region map");
      trace.validation.push_back(region_report(predict(model, validation_set->features), validation_set->labels, hist,
                                               *context.regions, plan.metrics));
    }
  }
  trace.backward_passes = state.backward_passes;
  trace.final_params = model.params.values;
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

nlohmann::json checkpoint_json(const MlpModel& model, const nlohmann::json& provenance) {
  return nlohmann::json{{"widths", model.widths()},
                        {"activation", to_string(model.activation())},
                        {"params", model.params.values},
                        {"provenance", provenance}};
}

MlpModel model_from_checkpoint(const nlohmann::json& j) {
  MlpModel model(j.at("widths").get<std::vector<std::size_t>>(), parse_activation(j.at("activation").get<std::string>()));
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != model.num_params()) throw ContractError("checkpoint parameter count does not match widths");
  model.params.values = std::move(params);
  return model;
}

}  // namespace bsam
