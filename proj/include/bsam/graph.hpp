#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bsam/dual.hpp"
#include "bsam/error.hpp"
#include "bsam/kernels.hpp"
#include "bsam/tensor.hpp"

namespace bsam {

using NodeId = std::size_t;

enum class Op { Input, Slice, MatMul, AddBias, Tanh, Relu, Sub, Abs, Square, ScaleEach, Sum, Mean };

// Append-only tape for reverse-mode differentiation. Inputs of a node are
// always earlier nodes, so a reverse sweep over creation order is a valid
// topological order.
template <class T>
class Graph {
 public:
  using Value = BasicTensor<T>;

  NodeId input(Value value, bool requires_grad = false) {
    return push(Op::Input, {}, std::move(value), requires_grad);
  }

  // Contiguous view of `x` starting at `offset`, reshaped to `shape`.
  NodeId slice(NodeId x, std::size_t offset, Shape shape) {
    const auto& src = value(x);
    Value out(std::move(shape));
    if (offset + out.size() > src.size()) {
      throw ShapeError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + out.size()) +
                       ") exceeds tensor of size " + std::to_string(src.size()));
    }
    std::copy(src.data.begin() + static_cast<std::ptrdiff_t>(offset),
              src.data.begin() + static_cast<std::ptrdiff_t>(offset + out.size()), out.data.begin());
    NodeId id = push(Op::Slice, {x}, std::move(out), nodes_[x].requires_grad);
    nodes_[id].offset = offset;
    return id;
  }

  NodeId matmul(NodeId a, NodeId b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[1] != bv.shape[0]) {
      throw ShapeError("matmul expects (n, m) x (m, k), got " + shape_string(av.shape) + " x " +
                       shape_string(bv.shape));
    }
    const std::size_t n = av.shape[0], m = av.shape[1], k = bv.shape[1];
    Value out({n, k});
    kernels::omp::matmul(av.data.data(), bv.data.data(), out.data.data(), n, m, k);
    return push(Op::MatMul, {a, b}, std::move(out), grad_of(a) || grad_of(b));
  }

  NodeId add_bias(NodeId x, NodeId bias) {
    const auto& xv = value(x);
    const auto& bv = value(bias);
    if (xv.shape.size() != 2 || bv.size() != xv.shape[1]) {
      throw ShapeError("add_bias expects (n, k) + (k), got " + shape_string(xv.shape) + " + " +
                       shape_string(bv.shape));
    }
    Value out = xv;
    kernels::omp::add_bias(out.data.data(), bv.data.data(), xv.shape[0], xv.shape[1]);
    return push(Op::AddBias, {x, bias}, std::move(out), grad_of(x) || grad_of(bias));
  }

  NodeId tanh(NodeId x) {
    const auto& xv = value(x);
    Value out(xv.shape);
    kernels::omp::tanh_forward(xv.data.data(), out.data.data(), xv.size());
    return push(Op::Tanh, {x}, std::move(out), grad_of(x));
  }

  NodeId relu(NodeId x) {
    const auto& xv = value(x);
    Value out(xv.shape);
    kernels::omp::relu_forward(xv.data.data(), out.data.data(), xv.size());
    return push(Op::Relu, {x}, std::move(out), grad_of(x));
  }

  NodeId sub(NodeId a, NodeId b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.shape != bv.shape) {
      throw ShapeError("sub shape mismatch: " + shape_string(av.shape) + " vs " + shape_string(bv.shape));
    }
    Value out(av.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    return push(Op::Sub, {a, b}, std::move(out), grad_of(a) || grad_of(b));
  }

  NodeId abs(NodeId x) {
    const auto& xv = value(x);
    Value out(xv.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = primal(xv[i]) < 0.0 ? -xv[i] : xv[i];
    return push(Op::Abs, {x}, std::move(out), grad_of(x));
  }

  NodeId square(NodeId x) {
    const auto& xv = value(x);
    Value out(xv.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * xv[i];
    return push(Op::Square, {x}, std::move(out), grad_of(x));
  }

  // Elementwise product with constant factors.
  NodeId scale_each(NodeId x, std::vector<double> factors) {
    const auto& xv = value(x);
    if (factors.size() != xv.size()) {
      throw ShapeError("scale_each needs " + std::to_string(xv.size()) + " factors, got " +
                       std::to_string(factors.size()));
    }
    Value out(xv.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factors[i];
    NodeId id = push(Op::ScaleEach, {x}, std::move(out), grad_of(x));
    nodes_[id].aux = std::move(factors);
    return id;
  }

  NodeId sum(NodeId x) {
    const auto& xv = value(x);
    T acc(0.0);
    for (const auto& e : xv.data) acc += e;
    return push(Op::Sum, {x}, Value({1}, {acc}), grad_of(x));
  }

  // (1/n) * sum_i w_i * x_i over all n elements; empty weights means w = 1.
  // The unweighted case runs the same arithmetic with unit weights.
  NodeId mean(NodeId x, std::span<const double> weights = {}) {
    const auto& xv = value(x);
    std::vector<double> w(weights.begin(), weights.end());
    if (w.empty()) w.assign(xv.size(), 1.0);
    if (w.size() != xv.size()) {
      throw ShapeError("mean needs " + std::to_string(xv.size()) + " weights, got " + std::to_string(w.size()));
    }
    const auto n = static_cast<double>(xv.size());
    T acc(0.0);
    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * w[i];
    NodeId id = push(Op::Mean, {x}, Value({1}, {acc / n}), grad_of(x));
    nodes_[id].aux = std::move(w);
    return id;
  }

  const Value& value(NodeId id) const { return node(id).value; }
  const Value& grad(NodeId id) const { return node(id).grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse accumulation from a scalar node. Gradients are reset first, so
  // repeated calls are idempotent.
  void backward(NodeId loss) {
    const auto& lv = value(loss);
    if (lv.size() != 1) {
      throw ContractError("backward needs a scalar loss node, got shape " + shape_string(lv.shape));
    }
    for (auto& n : nodes_) {
      n.grad.shape = n.value.shape;
      n.grad.data.assign(n.requires_grad ? n.value.size() : 0, T(0.0));
    }
    if (!nodes_[loss].requires_grad) return;
    nodes_[loss].grad.data[0] = T(1.0);
    for (std::size_t i = loss + 1; i-- > 0;) {
      if (nodes_[i].requires_grad) propagate(i);
    }
  }

 private:
  struct Node {
    Op op = Op::Input;
    std::vector<NodeId> inputs;
    Value value;
    Value grad;
    std::vector<double> aux;
    std::size_t offset = 0;
    bool requires_grad = false;
  };

  const Node& node(NodeId id) const {
    if (id >= nodes_.size()) throw ContractError("unknown graph node " + std::to_string(id));
    return nodes_[id];
  }

  bool grad_of(NodeId id) const { return node(id).requires_grad; }

  NodeId push(Op op, std::vector<NodeId> inputs, Value value, bool requires_grad) {
    Node n;
    n.op = op;
    n.inputs = std::move(inputs);
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  void propagate(NodeId id) {
    Node& n = nodes_[id];
    const auto& dy = n.grad.data;
    auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
    auto in_grad = [&](std::size_t k) -> std::vector<T>& { return nodes_[n.inputs[k]].grad.data; };
    auto in_value = [&](std::size_t k) -> const Value& { return nodes_[n.inputs[k]].value; };

    switch (n.op) {
      case Op::Input:
        break;
      case Op::Slice: {
        auto& dx = in_grad(0);
        for (std::size_t i = 0; i < dy.size(); ++i) dx[n.offset + i] += dy[i];
        break;
      }
      case Op::MatMul: {
        const auto& a = in_value(0);
        const auto& b = in_value(1);
        const std::size_t rows = a.shape[0], inner = a.shape[1], cols = b.shape[1];
        if (wants(0)) kernels::omp::matmul_grad_lhs(dy.data(), b.data.data(), in_grad(0).data(), rows, inner, cols);
        if (wants(1)) kernels::omp::matmul_grad_rhs(a.data.data(), dy.data(), in_grad(1).data(), rows, inner, cols);
        break;
      }
      case Op::AddBias: {
        const std::size_t rows = n.value.shape[0], cols = n.value.shape[1];
        if (wants(0)) {
          auto& dx = in_grad(0);
          for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
        }
        if (wants(1)) kernels::omp::bias_grad(dy.data(), in_grad(1).data(), rows, cols);
        break;
      }
      case Op::Tanh:
        kernels::omp::tanh_backward(n.value.data.data(), dy.data(), in_grad(0).data(), dy.size());
        break;
      case Op::Relu:
        kernels::omp::relu_backward(in_value(0).data.data(), dy.data(), in_grad(0).data(), dy.size());
        break;
      case Op::Sub:
        if (wants(0)) {
          auto& da = in_grad(0);
          for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
        }
        if (wants(1)) {
          auto& db = in_grad(1);
          for (std::size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
        }
        break;
      case Op::Abs: {
        // Subgradient 0 at the kink.
        const auto& x = in_value(0);
        auto& dx = in_grad(0);
        for (std::size_t i = 0; i < dy.size(); ++i) {
          const double s = primal(x[i]);
          if (s > 0.0) {
            dx[i] += dy[i];
          } else if (s < 0.0) {
            dx[i] -= dy[i];
          }
        }
        break;
      }
      case Op::Square: {
        const auto& x = in_value(0);
        auto& dx = in_grad(0);
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (x[i] * 2.0);
        break;
      }
      case Op::ScaleEach: {
        auto& dx = in_grad(0);
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * n.aux[i];
        break;
      }
      case Op::Sum: {
        auto& dx = in_grad(0);
        for (auto& e : dx) e += dy[0];
        break;
      }
      case Op::Mean: {
        auto& dx = in_grad(0);
        const auto count = static_cast<double>(dx.size());
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[0] * (n.aux[i] / count);
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace bsam
