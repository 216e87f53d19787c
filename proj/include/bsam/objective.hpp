#pragma once

#include <span>
#include <vector>

#include "bsam/dual.hpp"
#include "bsam/graph.hpp"
#include "bsam/losses.hpp"
#include "bsam/model.hpp"

namespace bsam {

// A scalar function of a flat parameter vector with first derivatives and
// Hessian-vector products.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> theta) const = 0;
  // Writes the gradient into `grad` and returns the value.
  virtual double gradient(std::span<const double> theta, std::span<double> grad) const = 0;
  // Exact H(theta) * v.
  virtual void hessian_vector(std::span<const double> theta, std::span<const double> v,
                              std::span<double> out) const = 0;
};

// Implements Objective for anything that can record its loss on a Graph<T>
// for T = double and T = Dual. Derived provides
//   template <class T> NodeId build(Graph<T>&, NodeId theta) const;
template <class Derived>
class TapeObjective : public Objective {
 public:
  double value(std::span<const double> theta) const override {
    Graph<double> g;
    const NodeId t = g.input(Tensor({dim()}, {theta.begin(), theta.end()}));
    return g.value(self().build(g, t))[0];
  }

  double gradient(std::span<const double> theta, std::span<double> grad) const override {
    check_len(theta.size(), "theta");
    check_len(grad.size(), "grad");
    Graph<double> g;
    const NodeId t = g.input(Tensor({dim()}, {theta.begin(), theta.end()}), true);
    const NodeId loss = self().build(g, t);
    g.backward(loss);
    const auto& gt = g.grad(t).data;
    std::copy(gt.begin(), gt.end(), grad.begin());
    return g.value(loss)[0];
  }

  void hessian_vector(std::span<const double> theta, std::span<const double> v, std::span<double> out) const override {
    check_len(theta.size(), "theta");
    check_len(v.size(), "v");
    check_len(out.size(), "out");
    Graph<Dual> g;
    BasicTensor<Dual> seed({dim()});
    for (std::size_t i = 0; i < dim(); ++i) seed[i] = Dual(theta[i], v[i]);
    const NodeId t = g.input(std::move(seed), true);
    g.backward(self().build(g, t));
    const auto& gt = g.grad(t).data;
    for (std::size_t i = 0; i < dim(); ++i) out[i] = gt[i].d;
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
  void check_len(std::size_t n, const char* what) const {
    if (n != dim()) {
      throw ShapeError(std::string(what) + " has length " + std::to_string(n) + ", objective dimension is " +
                       std::to_string(dim()));
    }
  }
};

// Objective from a generic callable `builder(Graph<T>&, NodeId theta) -> NodeId`.
template <class Builder>
class GraphObjective : public TapeObjective<GraphObjective<Builder>> {
 public:
  GraphObjective(std::size_t dim, Builder builder) : dim_(dim), builder_(std::move(builder)) {}
  std::size_t dim() const override { return dim_; }

  template <class T>
  NodeId build(Graph<T>& g, NodeId theta) const {
    return builder_(g, theta);
  }

 private:
  std::size_t dim_;
  Builder builder_;
};

template <class Builder>
GraphObjective<Builder> make_objective(std::size_t dim, Builder builder) {
  return GraphObjective<Builder>(dim, std::move(builder));
}

// Mean (optionally weighted) regression loss of an MLP over a fixed batch,
// as a function of the model's flat parameters.
class LossObjective : public TapeObjective<LossObjective> {
 public:
  LossObjective(const MlpModel& model, Tensor features, Tensor targets, LossKind kind,
                std::vector<double> weights = {});

  std::size_t dim() const override { return model_->num_params(); }

  template <class T>
  NodeId build(Graph<T>& g, NodeId theta) const {
    const NodeId x = g.input(convert_tensor<T>(features_));
    const NodeId y = g.input(convert_tensor<T>(targets_));
    const NodeId pred = build_forward(g, *model_, theta, x);
    return weights_.empty() ? build_mean_loss(g, kind_, pred, y)
                            : build_weighted_mean_loss(g, kind_, pred, y, weights_);
  }

 private:
  const MlpModel* model_;
  Tensor features_;
  Tensor targets_;
  LossKind kind_;
  std::vector<double> weights_;
};

enum class HvpMethod { Exact, FiniteDifference };

// H * v. FiniteDifference uses the symmetric gradient difference
// (g(theta + h u) - g(theta - h u)) * |v| / (2h), u = v/|v|,
// h = 1e-4 * (1 + max|theta_i|).
std::vector<double> hvp(const Objective& objective, std::span<const double> theta, std::span<const double> v,
                        HvpMethod method = HvpMethod::Exact);

}  // namespace bsam
