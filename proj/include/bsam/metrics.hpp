#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsam/imbalance.hpp"

namespace bsam {

// Errors below this are clamped before taking logs in the geometric mean.
inline constexpr double kGmEpsilon = 1e-6;
// Threshold ratio of delta1 (strict).
inline constexpr double kDelta1Threshold = 1.25;

double mae(std::span<const double> pred, std::span<const double> truth);
double gm(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);
double delta1(std::span<const double> pred, std::span<const double> truth);
// Mean over non-empty bins of the per-bin MAE, bins taken from `hist`.
double bmae(std::span<const double> pred, std::span<const double> truth, const LabelHistogram& hist);

enum class Metric { Mae, Gm, Rmse, Delta1, Bmae };

std::string to_string(Metric m);
Metric parse_metric(const std::string& s);
std::vector<Metric> default_metrics();

struct MetricReport {
  std::size_t n = 0;
  std::optional<double> mae;
  std::optional<double> gm;
  std::optional<double> rmse;
  std::optional<double> delta1;
  std::optional<double> bmae;

  std::optional<double> get(Metric m) const;
};

MetricReport metric_report(std::span<const double> pred, std::span<const double> truth, const LabelHistogram& hist,
                           std::span<const Metric> metrics);

struct RegionReport {
  MetricReport all;
  MetricReport many;
  MetricReport medium;
  MetricReport few;

  const MetricReport& region(Region r) const;
};

// Splits test samples by the training-histogram region of their label bin.
// Samples whose bin is empty in training only count towards `all`.
RegionReport region_report(std::span<const double> pred, std::span<const double> truth,
                           const LabelHistogram& train_hist, const RegionMap& regions,
                           std::span<const Metric> metrics);

void to_json(nlohmann::json& j, const MetricReport& r);
void to_json(nlohmann::json& j, const RegionReport& r);

// Rows "metric,all,many,medium,few"; absent values are written empty.
std::string region_report_csv(const RegionReport& r, std::span<const Metric> metrics);

}  // namespace bsam
