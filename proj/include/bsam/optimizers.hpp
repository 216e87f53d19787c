#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bsam/imbalance.hpp"
#include "bsam/losses.hpp"
#include "bsam/model.hpp"
#include "bsam/objective.hpp"

namespace bsam {

// Which loss the worst-case perturbation is computed from.
enum class PerturbationWeighting {
  None,      // plain mean loss (SAM)
  Table,     // importance-weighted loss from a per-bin weight table (BSAM)
  TailOnly,  // mean loss over Few-region samples only (ImbSAM)
};

struct PerturbationSpec {
  double rho = 0.05;
  // Norm of the rho-ball; p = infinity is allowed. The dual exponent q
  // satisfies 1/p + 1/q = 1.
  double p = 2.0;
  PerturbationWeighting weighting = PerturbationWeighting::None;

  double q() const;
  void validate() const;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Gradient norms below this are treated as a zero gradient.
inline constexpr double kMinGradNorm = 1e-12;

// Maximizer of eps^T g over ||eps||_p <= rho:
//   rho * sign(g) * |g|^(q-1) / ||g||_q^(q/p),
// which is rho * g / ||g||_2 for p = 2.
std::vector<double> compute_perturbation(std::span<const double> grad, const PerturbationSpec& spec);

double p_norm(std::span<const double> v, double p);

enum class Phase { AtTheta, AtPerturbed };

struct OptimizerState {
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::vector<double> epsilon;  // last eps*; meaningful while phase == AtPerturbed
  Phase phase = Phase::AtTheta;
  std::size_t steps = 0;
  std::size_t backward_passes = 0;
};

// theta <- theta - lr * (grad(theta) + weight_decay * theta). Returns the
// objective value at theta.
double descent_step(std::vector<double>& theta, const Objective& update, OptimizerState& state);

// Two-phase step: eps* from the gradient of `perturb` at theta, then
// theta <- theta - lr * (grad(update)(theta + eps*) + weight_decay * theta).
// theta is restored from a saved copy before the update. Returns the update
// objective at theta + eps*.
double sharpness_aware_step(std::vector<double>& theta, const Objective& perturb, const Objective& update,
                            const PerturbationSpec& spec, OptimizerState& state);

struct Batch {
  Tensor features;                    // (B, d)
  std::vector<double> labels;         // B
  std::vector<double> update_weights; // per-sample weights of the update loss; empty = unweighted

  std::size_t size() const { return labels.size(); }
  Tensor targets() const;
};

double sgd_step(MlpModel& model, const Batch& batch, LossKind loss, OptimizerState& state);

double sam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                OptimizerState& state);

double bsam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                 const WeightTable& table, const LabelHistogram& hist, OptimizerState& state);

double imbsam_step(MlpModel& model, const Batch& batch, LossKind loss, const PerturbationSpec& spec,
                   const RegionMap& regions, const LabelHistogram& hist, OptimizerState& state);

// Per-sample weights B / n_few on Few-region samples and 0 elsewhere, so the
// weighted batch mean equals the plain mean over the Few subset. All zeros
// when the batch has no Few sample.
std::vector<double> tail_weights(std::span<const double> labels, const RegionMap& regions, const LabelHistogram& hist);

enum class OptimizerKind { Sgd, Sam, Bsam, ImbSam };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer_kind(const std::string& s);

// Dispatches to the step function of one optimizer kind. The histogram,
// perturbation weight table and region map must outlive the optimizer.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, PerturbationSpec spec, const LabelHistogram* hist = nullptr,
            const WeightTable* perturbation_weights = nullptr, const RegionMap* regions = nullptr);

  double step(MlpModel& model, const Batch& batch, LossKind loss, OptimizerState& state) const;
  OptimizerKind kind() const { return kind_; }
  const PerturbationSpec& spec() const { return spec_; }
  // Backward passes one step performs.
  std::size_t passes_per_step() const { return kind_ == OptimizerKind::Sgd ? 1 : 2; }

 private:
  OptimizerKind kind_;
  PerturbationSpec spec_;
  const LabelHistogram* hist_;
  const WeightTable* weights_;
  const RegionMap* regions_;
};

}  // namespace bsam
