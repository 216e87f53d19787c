#include "bsam/optimizers.hpp"

#include <algorithm>
#include <cmath>

namespace bsam {

double PerturbationSpec::q() const {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInfinity;
  return p / (p - 1.0);
}

void PerturbationSpec::validate() const {
  if (!(rho >= 0.0) || std::isinf(rho)) throw ContractError("rho must be a finite non-negative number");
  if (!(p >= 1.0)) throw ContractError("p must be >= 1 (or infinity)");
}

double p_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  }
  for (double x : v) acc += std::pow(std::fabs(x), p);
  return std::pow(acc, 1.0 / p);
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_loss(double loss, const char* phase) {
  if (!std::isfinite(loss)) throw NumericError(std::string("non-finite loss in ") + phase);
}

void apply_update(std::vector<double>& theta, std::span<const double> grad, const OptimizerState& state) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] -= state.learning_rate * (grad[i] + state.weight_decay * theta[i]);
  }
}

}  // namespace

std::vector<double> compute_perturbation(std::span<const double> grad, const PerturbationSpec& spec) {
  spec.validate();
  std::vector<double> eps(grad.size(), 0.0);
  if (spec.rho == 0.0 || p_norm(grad, 2.0) < kMinGradNorm) return eps;

  if (spec.p == 2.0) {
    const double scale = spec.rho / p_norm(grad, 2.0);
    for (std::size_t i = 0; i < grad.size(); ++i) eps[i] = scale * grad[i];
    return eps;
  }
  if (std::isinf(spec.p)) {
    for (std::size_t i = 0; i < grad.size(); ++i) eps[i] = spec.rho * sign(grad[i]);
    return eps;
  }
  if (spec.p == 1.0) {
    // All mass on the (first) largest-magnitude coordinate.
    std::size_t best = 0;
    for (std::size_t i = 1; i < grad.size(); ++i) {
      if (std::fabs(grad[i]) > std::fabs(grad[best])) best = i;
    }
    eps[best] = spec.rho * sign(grad[best]);
    return eps;
  }
  const double q = spec.q();
  const double denom = std::pow(p_norm(grad, q), q / spec.p);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    eps[i] = spec.rho * sign(grad[i]) * std::pow(std::fabs(grad[i]), q - 1.0) / denom;
  }
  return eps;
}

double descent_step(std::vector<double>& theta, const Objective& update, OptimizerState& state) {
  std::vector<double> grad(theta.size());
  const double loss = update.gradient(theta, grad);
  ++state.backward_passes;
  check_loss(loss, "descent step");
  apply_update(theta, grad, state);
  ++state.steps;
  return loss;
}

double sharpness_aware_step(std::vector<double>& theta, const Objective& perturb, const Objective& update,
                            const PerturbationSpec& spec, OptimizerState& state) {
  std::vector<double> grad(theta.size());
  const double perturb_loss = perturb.gradient(theta, grad);
  ++state.backward_passes;
  check_loss(perturb_loss, "perturbation phase");
  state.epsilon = compute_perturbation(grad, spec);

  const std::vector<double> saved = theta;
  state.phase = Phase::AtPerturbed;
  double loss = 0.0;
  if (all_zero(state.epsilon)) {
    loss = update.gradient(theta, grad);
  } else {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += state.epsilon[i];
    loss = update.gradient(theta, grad);
    theta = saved;
  }
  ++state.backward_passes;
  state.phase = Phase::AtTheta;
  check_loss(loss, "update phase");
  apply_update(theta, grad, state);
  ++state.steps;
  return loss;
}

Tensor Batch::targets() const { return Tensor({labels.size(), 1}, labels); }

namespace {

void check_batch(const Batch& batch) {
  if (batch.size() == 0) throw ContractError("optimizer step needs a non-empty batch");
  if (batch.features.rows() != batch.size()) {
    throw ShapeError("batch has " + std::to_string(batch.features.rows()) + " feature rows but " +
                     std::to_string(batch.size()) + " labels");
  }
}

LossObjective update_objective(const MlpModel& model, const Batch& batch, LossKind loss) {
  return LossObjective(model, batch.features, batch.targets(), loss, batch.update_weights);
}

double perturbed_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                      std::vector<double> perturb_weights, OptimizerState& state) {
  check_batch(batch);
  const LossObjective perturb(model, batch.features, batch.targets(), loss, std::move(perturb_weights));
  const LossObjective update = update_objective(model, batch, loss);
  return sharpness_aware_step(model.params.values, perturb, update, spec, state);
}

}  // namespace

double sgd_step(MlpModel& model, const Batch& batch, LossKind loss, OptimizerState& state) {
  check_batch(batch);
  return descent_step(model.params.values, update_objective(model, batch, loss), state);
}

double sam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                OptimizerState& state) {
  return perturbed_step(model, batch, loss, spec, {}, state);
}

double bsam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                 const WeightTable& table, const LabelHistogram& hist, OptimizerState& state) {
  return perturbed_step(model, batch, loss, spec, sample_weights(hist, table, batch.labels), state);
}

std::vector<double> tail_weights(std::span<const double> labels, const RegionMap& regions, const LabelHistogram& hist) {
  if (regions.regions.size() != hist.bins()) throw ShapeError("region map does not match histogram bins");
  std::vector<double> w(labels.size(), 0.0);
  std::size_t tail = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (regions.regions[hist.bin_of(labels[i])] == Region::Few) {
      w[i] = 1.0;
      ++tail;
    }
  }
  if (tail == 0) return w;
  const double scale = static_cast<double>(labels.size()) / static_cast<double>(tail);
  for (auto& x : w) x *= scale;
  return w;
}

double imbsam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                   const RegionMap& regions, const LabelHistogram& hist, OptimizerState& state) {
  return perturbed_step(model, batch, loss, spec, tail_weights(batch.labels, regions, hist), state);
}

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd:
      return "sgd";
    case OptimizerKind::Sam:
      return "sam";
    case OptimizerKind::Bsam:
      return "bsam";
    case OptimizerKind::ImbSam:
      return "imbsam";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "sam") return OptimizerKind::Sam;
  if (s == "bsam") return OptimizerKind::Bsam;
  if (s == "imbsam") return OptimizerKind::ImbSam;
  throw ContractError("unknown optimizer '" + s + "' (expected sgd, sam, bsam or imbsam)");
}

Optimizer::Optimizer(OptimizerKind kind, PerturbationSpec spec, const LabelHistogram* hist,
                     const WeightTable* perturbation_weights, const RegionMap* regions)
    : kind_(kind), spec_(spec), hist_(hist), weights_(perturbation_weights), regions_(regions) {
  spec_.validate();
  switch (kind_) {
    case OptimizerKind::Sgd:
    case OptimizerKind::Sam:
      spec_.weighting = PerturbationWeighting::None;
      break;
    case OptimizerKind::Bsam:
      spec_.weighting = PerturbationWeighting::Table;
      if (!hist_ || !weights_) throw ContractError("bsam needs a label histogram and a weight table");
      if (weights_->weights.size() != hist_->bins()) throw ContractError("weight table does not match histogram");
      break;
    case OptimizerKind::ImbSam:
      spec_.weighting = PerturbationWeighting::TailOnly;
      if (!hist_ || !regions_) throw ContractError("imbsam needs a label histogram and a region map");
      break;
  }
}

double Optimizer::step(MlpModel& model, const Batch& batch, LossKind loss, OptimizerState& state) const {
  switch (kind_) {
    case OptimizerKind::Sgd:
      return sgd_step(model, batch, loss, state);
    case OptimizerKind::Sam:
      return sam_step(model, batch, loss, spec_, state);
    case OptimizerKind::Bsam:
      return bsam_step(model, batch, loss, spec_, *weights_, *hist_, state);
    case OptimizerKind::ImbSam:
      return imbsam_step(model, batch, loss, spec_, *regions_, *hist_, state);
  }
  return 0.0;
}

}  // namespace bsam
