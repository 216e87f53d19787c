#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsam/losses.hpp"
#include "bsam/model.hpp"
#include "bsam/objective.hpp"

namespace bsam {

struct PowerIterationResult {
  double lambda_max = 0.0;  // signed Rayleigh quotient of the largest-magnitude eigenpair
  std::size_t iterations = 0;
  bool converged = false;
  bool degenerate = false;  // H v vanished three times in a row
};

// Power iteration v <- Hv / |Hv| from a seeded random unit vector, stopping
// when the Rayleigh quotient changes by less than tol * max(1, |rq|).
PowerIterationResult lambda_max(const Objective& objective, std::span<const double> theta, std::size_t iters,
                                double tol, std::uint64_t seed, HvpMethod method = HvpMethod::Exact);

// Probe `index` of the Hutchinson stream for `seed`: entries +-1.
std::vector<double> rademacher_probe(std::size_t dim, std::uint64_t seed, std::size_t index);

struct TraceEstimate {
  double trace = 0.0;
  std::vector<double> samples;  // z_j^T H z_j per probe
  double standard_error() const;
};

// Hutchinson estimate (1/M) sum_j z_j^T H z_j.
TraceEstimate hessian_trace(const Objective& objective, std::span<const double> theta, std::size_t probes,
                            std::uint64_t seed, HvpMethod method = HvpMethod::Exact);

struct LossSlice {
  std::uint64_t direction_seed = 0;
  std::vector<double> offsets;
  std::vector<double> losses;
  std::string normalization = "filter";
};

// Seeded Gaussian direction rescaled segment-wise to the norm of the
// matching parameter segment.
std::vector<double> filter_normalized_direction(const ParamVector& params, std::uint64_t seed);

// Loss at theta + t * d for every offset t (sorted ascending). Model
// parameters are not modified.
LossSlice loss_slice(const MlpModel& model, const Tensor& features, std::span<const double> labels, LossKind loss,
                     std::uint64_t direction_seed, std::vector<double> offsets);

struct SharpnessOptions {
  std::size_t power_iters = 200;
  double tol = 1e-6;
  std::size_t probes = 100;
  std::uint64_t seed = 0;
  std::string subset = "few";
  HvpMethod method = HvpMethod::Exact;
};

struct SharpnessReport {
  double lambda_max = 0.0;
  double trace = 0.0;
  std::size_t probes = 0;
  std::size_t power_iters = 0;
  std::size_t iterations_used = 0;
  bool degenerate = false;
  std::string subset;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

// lambda_max and Tr(H) of the unweighted mean loss over the given samples.
SharpnessReport sharpness(const MlpModel& model, const Tensor& features, std::span<const double> labels,
                          LossKind loss, const SharpnessOptions& options);

void to_json(nlohmann::json& j, const SharpnessReport& r);
std::string loss_slice_csv(const LossSlice& slice);

}  // namespace bsam
