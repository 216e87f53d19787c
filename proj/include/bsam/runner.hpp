#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsam/config.hpp"
#include "bsam/metrics.hpp"
#include "bsam/sharpness.hpp"

namespace bsam {

// Environment variable that, when set, roots relative output directories.
inline constexpr const char* kOutputRootEnv = "BSAM_OUTPUT_ROOT";

struct ResultRow {
  std::string optimizer;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | diverged | error
  std::string message;
  RegionReport report;
  std::optional<SharpnessReport> sharpness;
  double wall_seconds = 0.0;
  std::size_t batches = 0;
  std::size_t backward_passes = 0;
  std::vector<double> epoch_loss;
};

struct RunResult {
  std::string output_dir;
  std::vector<ResultRow> rows;
};

std::string resolve_output_dir(const std::string& configured);

// Executes every (seed, optimizer, rho) cell, seeds outermost, and writes
// results.csv, results.json, checkpoints/, and when sharpness is enabled
// sharpness.json and slices/ into the output directory.
RunResult run_experiment(const ExperimentConfig& config);

// Fixed-column table: optimizer, rho, seed, status, <metric>_<region>...,
// lambda_max, trace_h, wall_s.
std::vector<std::string> results_columns(const ExperimentConfig& config);
std::string results_csv(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

struct CompareRow {
  std::string metric;
  double baseline = 0.0;
  double candidate = 0.0;
  double delta = 0.0;  // candidate - baseline
};

// Per-column means over the status=ok rows of each selector ("name" or
// "name@rho") and their difference.
std::vector<CompareRow> compare_results(const std::string& csv_text, const std::string& baseline,
                                        const std::string& candidate);
std::string compare_csv(const std::vector<CompareRow>& rows);
std::string compare_table(const std::vector<CompareRow>& rows, const std::string& baseline,
                          const std::string& candidate);

std::string format_number(double v);

}  // namespace bsam
