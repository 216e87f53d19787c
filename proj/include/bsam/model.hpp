#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsam/graph.hpp"
#include "bsam/tensor.hpp"

namespace bsam {

struct ParamSegment {
  std::string name;  // e.g. "layer0.weight"
  std::size_t offset = 0;
  Shape shape;
  std::size_t size() const { return shape_size(shape); }
};

// Flat parameter vector with a matching gradient slot. Segments partition
// [0, size()) in order.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<ParamSegment> segments);

  std::size_t size() const { return values.size(); }
  const std::vector<ParamSegment>& segments() const { return segments_; }
  const ParamSegment& segment(const std::string& name) const;

  std::vector<double> values;
  std::vector<double> grads;

 private:
  std::vector<ParamSegment> segments_;
};

enum class Activation { Relu, Tanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

// Feed-forward regressor R^d -> R: affine layers with `activation` between
// them and a linear output head.
class MlpModel {
 public:
  MlpModel(std::vector<std::size_t> widths, Activation activation);

  const std::vector<std::size_t>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t layers() const { return widths_.size() - 1; }
  std::size_t num_params() const { return params.size(); }

  // Glorot-uniform weights, zero biases.
  void init(std::uint64_t seed);

  const ParamSegment& weight(std::size_t layer) const { return params.segments()[2 * layer]; }
  const ParamSegment& bias(std::size_t layer) const { return params.segments()[2 * layer + 1]; }

  ParamVector params;

 private:
  std::vector<std::size_t> widths_;
  Activation activation_;
};

// Records the forward pass of `model` on `graph`, reading parameters from the
// flat node `theta`. Returns the (B, 1) prediction node.
template <class T>
NodeId build_forward(Graph<T>& graph, const MlpModel& model, NodeId theta, NodeId inputs) {
  const auto& x = graph.value(inputs);
  if (x.shape.size() != 2 || x.shape[1] != model.input_dim()) {
    throw ShapeError("forward expects inputs of shape (B, " + std::to_string(model.input_dim()) + "), got " +
                     shape_string(x.shape));
  }
  NodeId h = inputs;
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const auto& w = model.weight(l);
    const auto& b = model.bias(l);
    h = graph.add_bias(graph.matmul(h, graph.slice(theta, w.offset, w.shape)), graph.slice(theta, b.offset, b.shape));
    if (l + 1 < model.layers()) {
      h = model.activation() == Activation::Tanh ? graph.tanh(h) : graph.relu(h);
    }
  }
  return h;
}

// Plain evaluation at the model's current parameters; returns (B, 1).
Tensor forward(const MlpModel& model, const Tensor& batch_inputs);

}  // namespace bsam
