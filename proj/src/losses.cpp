#include "bsam/losses.hpp"

#include <cmath>

namespace bsam {

std::string to_string(LossKind k) { return k == LossKind::L1 ? "l1" : "l2"; }

LossKind parse_loss_kind(const std::string& s) {
  if (s == "l1" || s == "L1") return LossKind::L1;
  if (s == "l2" || s == "L2") return LossKind::L2;
  throw ContractError("unknown loss '" + s + "' (expected l1 or l2)");
}

namespace detail {

void check_loss_shapes(const Shape& pred, const Shape& target) {
  if (pred != target) {
    throw ShapeError("loss shape mismatch: prediction " + shape_string(pred) + " vs target " + shape_string(target));
  }
}

void check_loss_weights(std::span<const double> weights, std::size_t batch) {
  if (weights.size() != batch) {
    throw ShapeError("weight vector length " + std::to_string(weights.size()) + " does not match batch size " +
                     std::to_string(batch));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw ContractError("sample weight " + std::to_string(i) + " is negative or NaN");
    }
  }
}

}  // namespace detail

Tensor per_sample_loss(LossKind kind, const Tensor& pred, const Tensor& target) {
  detail::check_loss_shapes(pred.shape, target.shape);
  Tensor out(pred.shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = pred[i] - target[i];
    out[i] = kind == LossKind::L1 ? std::fabs(r) : r * r;
  }
  return out;
}

double mean_loss(LossKind kind, const Tensor& pred, const Tensor& target) {
  Graph<double> g;
  const NodeId p = g.input(pred);
  const NodeId t = g.input(target);
  return g.value(build_mean_loss(g, kind, p, t))[0];
}

double weighted_mean_loss(LossKind kind, const Tensor& pred, const Tensor& target, std::span<const double> weights) {
  Graph<double> g;
  const NodeId p = g.input(pred);
  const NodeId t = g.input(target);
  return g.value(build_weighted_mean_loss(g, kind, p, t, weights))[0];
}

}  // namespace bsam
