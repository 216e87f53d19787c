#pragma once

#include <span>
#include <string>

#include "bsam/graph.hpp"
#include "bsam/tensor.hpp"

namespace bsam {

enum class LossKind { L1, L2 };

std::string to_string(LossKind k);
LossKind parse_loss_kind(const std::string& s);

namespace detail {
void check_loss_shapes(const Shape& pred, const Shape& target);
void check_loss_weights(std::span<const double> weights, std::size_t batch);
}  // namespace detail

// |pred - target| or (pred - target)^2 per sample, as a graph node.
template <class T>
NodeId build_per_sample_loss(Graph<T>& g, LossKind kind, NodeId pred, NodeId target) {
  detail::check_loss_shapes(g.value(pred).shape, g.value(target).shape);
  const NodeId residual = g.sub(pred, target);
  return kind == LossKind::L1 ? g.abs(residual) : g.square(residual);
}

template <class T>
NodeId build_mean_loss(Graph<T>& g, LossKind kind, NodeId pred, NodeId target) {
  return g.mean(build_per_sample_loss(g, kind, pred, target));
}

// (1/B) * sum_i w_i * l_i. Divides by the batch size, not by sum(w).
template <class T>
NodeId build_weighted_mean_loss(Graph<T>& g, LossKind kind, NodeId pred, NodeId target,
                                std::span<const double> weights) {
  detail::check_loss_weights(weights, g.value(pred).rows());
  return g.mean(build_per_sample_loss(g, kind, pred, target), weights);
}

Tensor per_sample_loss(LossKind kind, const Tensor& pred, const Tensor& target);
double mean_loss(LossKind kind, const Tensor& pred, const Tensor& target);
double weighted_mean_loss(LossKind kind, const Tensor& pred, const Tensor& target, std::span<const double> weights);

}  // namespace bsam
