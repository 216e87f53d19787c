#include "bsam/model.hpp"

#include <cmath>
#include <random>

namespace bsam {

ParamVector::ParamVector(std::vector<ParamSegment> segments) : segments_(std::move(segments)) {
  std::size_t offset = 0;
  for (auto& s : segments_) {
    s.offset = offset;
    offset += s.size();
  }
  values.assign(offset, 0.0);
  grads.assign(offset, 0.0);
}

const ParamSegment& ParamVector::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw ContractError("no parameter segment named '" + name + "'");
}

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  throw ContractError("unknown activation '" + s + "' (expected relu or tanh)");
}

namespace {

std::vector<ParamSegment> layout(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw ContractError("an MLP needs at least input and output widths");
  if (widths.back() != 1) throw ContractError("the last layer width must be 1 for scalar regression");
  std::vector<ParamSegment> segs;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] == 0) throw ContractError("layer widths must be positive");
    const auto prefix = "layer" + std::to_string(l);
    segs.push_back({prefix + ".weight", 0, {widths[l], widths[l + 1]}});
    segs.push_back({prefix + ".bias", 0, {widths[l + 1]}});
  }
  return segs;
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> widths, Activation activation)
    : params(layout(widths)), widths_(std::move(widths)), activation_(activation) {}

void MlpModel::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers(); ++l) {
    const auto& w = weight(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(widths_[l] + widths_[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < w.size(); ++i) params.values[w.offset + i] = dist(rng);
    const auto& b = bias(l);
    std::fill_n(params.values.begin() + static_cast<std::ptrdiff_t>(b.offset), b.size(), 0.0);
  }
  std::fill(params.grads.begin(), params.grads.end(), 0.0);
}

Tensor forward(const MlpModel& model, const Tensor& batch_inputs) {
  Graph<double> g;
  const NodeId theta = g.input(Tensor({model.num_params()}, model.params.values));
  const NodeId x = g.input(batch_inputs);
  return g.value(build_forward(g, model, theta, x));
}

}  // namespace bsam
