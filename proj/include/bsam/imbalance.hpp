#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace bsam {

// K equal-width bins over the closed label interval [lower, upper].
class LabelHistogram {
 public:
  LabelHistogram(double lower, double upper, std::size_t bins);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  std::size_t bins() const { return counts_.size(); }
  double width() const { return (upper_ - lower_) / static_cast<double>(bins()); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t total() const { return total_; }

  // floor((y - L) / width), with y == U mapped to the last bin.
  std::size_t bin_of(double label) const;
  void add(double label);

 private:
  double lower_;
  double upper_;
  std::vector<double> edges_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

LabelHistogram build_histogram(std::span<const double> labels, double lower, double upper, std::size_t bins);

enum class WeightMode { Inv, Sqinv, Uniform, Custom };

std::string to_string(WeightMode m);
WeightMode parse_weight_mode(const std::string& s);

struct WeightTable {
  WeightMode mode = WeightMode::Uniform;
  std::vector<double> weights;  // one per bin, zero on empty bins
  double normalization = 1.0;   // factor applied to the raw weights
};

// Raw INV (1/n_k), SQINV (sqrt(1/n_k)) or UNIFORM weights on non-empty bins.
// With `normalize`, rescales so that sum_k n_k w_k = N.
WeightTable compute_weights(const LabelHistogram& hist, WeightMode mode, bool normalize = true);

// Wraps caller-provided per-bin weights.
WeightTable custom_weights(const LabelHistogram& hist, std::vector<double> weights, bool normalize = true);

std::vector<double> sample_weights(const LabelHistogram& hist, const WeightTable& table, std::span<const double> labels);

enum class Region { Many, Medium, Few, Empty };

std::string to_string(Region r);

struct RegionMap {
  std::size_t many_threshold = 100;
  std::size_t few_threshold = 20;
  std::vector<Region> regions;  // per bin
};

// Many: n_k > many_threshold; Few: 0 < n_k < few_threshold; Medium otherwise.
RegionMap assign_regions(const LabelHistogram& hist, std::size_t many_threshold, std::size_t few_threshold);

void to_json(nlohmann::json& j, const LabelHistogram& h);
void to_json(nlohmann::json& j, const WeightTable& w);
nlohmann::json histogram_json(const LabelHistogram& h, const WeightTable& w);

}  // namespace bsam
