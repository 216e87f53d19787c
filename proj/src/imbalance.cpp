#include "bsam/imbalance.hpp"

#include <cmath>


#include "bsam/error.hpp"

namespace bsam {

LabelHistogram::LabelHistogram(double lower, double upper, std::size_t bins)
    : lower_(lower), upper_(upper), counts_(bins, 0) {
  if (bins == 0) throw ContractError("histogram needs at least one bin");
  if (!(lower < upper)) throw ContractError("histogram needs lower < upper");
  edges_.resize(bins + 1);
  for (std::size_t k = 0; k < bins; ++k) edges_[k] = lower + static_cast<double>(k) * width();
  edges_[bins] = upper;
}

std::size_t LabelHistogram::bin_of(double label) const {
  if (!(label >= lower_ && label <= upper_)) {
    throw RangeError("label " + std::to_string(label) + " outside [" + std::to_string(lower_) + ", " +
                         std::to_string(upper_) + "]",
                     label);
  }
  const auto k = static_cast<std::size_t>(std::floor((label - lower_) / width()));
  return std::min(k, bins() - 1);
}

void LabelHistogram::add(double label) {
  ++counts_[bin_of(label)];
  ++total_;
}

LabelHistogram build_histogram(std::span<const double> labels, double lower, double upper, std::size_t bins) {
  LabelHistogram h(lower, upper, bins);
  for (double y : labels) h.add(y);
  return h;
}

std::string to_string(WeightMode m) {
  switch (m) {
    case WeightMode::Inv:
      return "inv";
    case WeightMode::Sqinv:
      return "sqinv";
    case WeightMode::Uniform:
      return "uniform";
    case WeightMode::Custom:
      return "custom";
  }
  return "?";
}

WeightMode parse_weight_mode(const std::string& s) {
  if (s == "inv" || s == "INV") return WeightMode::Inv;
  if (s == "sqinv" || s == "SQINV") return WeightMode::Sqinv;
  if (s == "uniform" || s == "UNIFORM") return WeightMode::Uniform;
  throw ContractError("unknown weighting '" + s + "' (expected inv, sqinv or uniform)");
}

namespace {

void normalize_table(const LabelHistogram& hist, WeightTable& table) {
  double mass = 0.0;
  for (std::size_t k = 0; k < hist.bins(); ++k) mass += static_cast<double>(hist.counts()[k]) * table.weights[k];
  if (!(mass > 0.0)) throw ContractError("cannot normalize weights with zero total mass");
  table.normalization = static_cast<double>(hist.total()) / mass;
  for (auto& w : table.weights) w *= table.normalization;
}

}  // namespace

WeightTable compute_weights(const LabelHistogram& hist, WeightMode mode, bool normalize) {
  if (mode == WeightMode::Custom) throw ContractError("custom weights must be supplied via custom_weights");
  if (hist.total() == 0) throw ContractError("cannot weight a histogram whose bins are all empty");
  WeightTable table;
  table.mode = mode;
  table.weights.assign(hist.bins(), 0.0);
  for (std::size_t k = 0; k < hist.bins(); ++k) {
    const auto n = static_cast<double>(hist.counts()[k]);
    if (n == 0.0) continue;
    switch (mode) {
      case WeightMode::Inv:
        table.weights[k] = 1.0 / n;
        break;
      case WeightMode::Sqinv:
        table.weights[k] = std::sqrt(1.0 / n);
        break;
      default:
        table.weights[k] = 1.0;
        break;
    }
  }
  if (normalize) normalize_table(hist, table);
  return table;
}

WeightTable custom_weights(const LabelHistogram& hist, std::vector<double> weights, bool normalize) {
  if (weights.size() != hist.bins()) throw ShapeError("custom weights need one entry per bin");
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("custom weights must be non-negative");
  }
  WeightTable table{WeightMode::Custom, std::move(weights), 1.0};
  for (std::size_t k = 0; k < hist.bins(); ++k) {
    if (hist.counts()[k] == 0) table.weights[k] = 0.0;
  }
  if (normalize) normalize_table(hist, table);
  return table;
}

std::vector<double> sample_weights(const LabelHistogram& hist, const WeightTable& table, std::span<const double> labels) {
  if (table.weights.size() != hist.bins()) throw ShapeError("weight table does not match histogram bins");
  std::vector<double> out;
  out.reserve(labels.size());
  for (double y : labels) out.push_back(table.weights[hist.bin_of(y)]);
  return out;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Many:
      return "many";
    case Region::Medium:
      return "medium";
    case Region::Few:
      return "few";
    case Region::Empty:
      return "empty";
  }
  return "?";
}

RegionMap assign_regions(const LabelHistogram& hist, std::size_t many_threshold, std::size_t few_threshold) {
  if (few_threshold == 0 || few_threshold > many_threshold) {
    throw ContractError("region thresholds need 0 < few_threshold <= many_threshold");
  }
  RegionMap map{many_threshold, few_threshold, {}};
  map.regions.reserve(hist.bins());
  for (auto n : hist.counts()) {
    if (n == 0) {
      map.regions.push_back(Region::Empty);
    } else if (n > many_threshold) {
      map.regions.push_back(Region::Many);
    } else if (n < few_threshold) {
      map.regions.push_back(Region::Few);
    } else {
      map.regions.push_back(Region::Medium);
    }
  }
  return map;
}

void to_json(nlohmann::json& j, const LabelHistogram& h) {
  j = nlohmann::json{{"lower", h.lower()}, {"upper", h.upper()}, {"edges", h.edges()}, {"counts", h.counts()}};
}

void to_json(nlohmann::json& j, const WeightTable& w) {
  j = nlohmann::json{{"mode", to_string(w.mode)}, {"weights", w.weights}, {"normalization", w.normalization}};
}

nlohmann::json histogram_json(const LabelHistogram& h, const WeightTable& w) {
  nlohmann::json j = h;
  j["weights"] = w.weights;
  j["mode"] = to_string(w.mode);
  j["normalization"] = w.normalization;
  return j;
}

}  // namespace bsam
