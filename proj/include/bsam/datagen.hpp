#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsam/tensor.hpp"

namespace bsam {

// Label density over the normalized label t = (y - L) / (U - L) in [0, 1].
struct DensityProfile {
  enum class Kind { Uniform, Exponential, ParetoTail, TwoMode };
  Kind kind = Kind::Exponential;
  double rate = 4.0;   // Exponential: density ~ exp(-rate * t)
  double alpha = 1.5;  // ParetoTail: density ~ (1 + 9t)^-(alpha + 1)
  double mix = 0.8;    // TwoMode: probability of the first mode
  std::array<double, 2> centers{0.2, 0.75};
  std::array<double, 2> widths{0.1, 0.05};

  void validate() const;
  static Kind parse_kind(const std::string& s);
};

std::string to_string(DensityProfile::Kind k);

struct FeatureMap {
  enum class Kind { Linear, Trig, Poly };
  Kind kind = Kind::Trig;
  std::size_t dim = 4;  // output dimension (degree for Poly)

  static Kind parse_kind(const std::string& s);
};

std::string to_string(FeatureMap::Kind k);

// Noise-free features of label y.
std::vector<double> map_features(const FeatureMap& map, double y, double lower, double upper);

struct DatasetSpec {
  std::size_t n_train = 20000;
  std::size_t n_test = 5000;
  double lower = 1.0;
  double upper = 11.0;
  DensityProfile profile;
  FeatureMap feature_map;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegressionDataset {
  Tensor features;  // (N, d)
  std::vector<double> labels;
  std::string split;
  double lower = 0.0;
  double upper = 0.0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  // Rows at `indices`, in that order.
  RegressionDataset subset(const std::vector<std::size_t>& indices) const;
};

// Imbalanced training labels drawn from the profile, balanced (uniform) test
// labels; features are map_features(y) plus N(0, sigma^2) per coordinate.
// Deterministic in the spec.
std::pair<RegressionDataset, RegressionDataset> generate(const DatasetSpec& spec);

// Labels from `profile` mapped onto [lower, upper].
std::vector<double> sample_labels(const DensityProfile& profile, double lower, double upper, std::size_t n,
                                  std::uint64_t seed);

// Comma-separated with a header row; every non-label column is a feature, in
// header order. The label range defaults to the observed min/max.
RegressionDataset load_csv(const std::string& path, const std::string& label_column = "y",
                           std::optional<std::pair<double, double>> label_range = std::nullopt);

void save_csv(const RegressionDataset& data, const std::string& path, const std::string& label_column = "y");

}  // namespace bsam
