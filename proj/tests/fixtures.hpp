#pragma once

#include <random>
#include <vector>

#include "bsam/model.hpp"
#include "bsam/optimizers.hpp"
#include "bsam/tensor.hpp"

namespace fixtures {

inline bsam::Tensor random_inputs(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  bsam::Tensor t({rows, cols});
  for (auto& e : t.data) e = d(rng);
  return t;
}

inline std::vector<double> random_labels(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& e : v) e = d(rng);
  return v;
}

inline bsam::MlpModel seeded_model(std::vector<std::size_t> widths, bsam::Activation act, std::uint64_t seed) {
  bsam::MlpModel m(std::move(widths), act);
  m.init(seed);
  // Non-zero biases so every term of the forward pass is exercised.
  std::mt19937_64 rng(seed ^ 0xB1A5);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  for (std::size_t l = 0; l < m.layers(); ++l) {
    const auto& b = m.bias(l);
    for (std::size_t i = 0; i < b.size(); ++i) m.params.values[b.offset + i] = d(rng);
  }
  return m;
}

// Tiny 10-4-1 tanh regression problem (49 parameters) whose labels are the
// model's own predictions plus uniform noise in [-1, 1].
struct TinyRegression {
  bsam::MlpModel model;
  bsam::Tensor x;
  bsam::Tensor y;
};

inline TinyRegression tiny_regression(std::uint64_t seed, std::size_t batch = 128) {
  auto m = seeded_model({10, 4, 1}, bsam::Activation::Tanh, 1000 + seed);
  auto x = random_inputs(batch, 10, 2000 + seed);
  auto y = random_labels(batch, -1, 1, 3000 + seed);
  const auto pred = bsam::forward(m, x);
  for (std::size_t i = 0; i < batch; ++i) y[i] += pred.data[i];
  return {std::move(m), std::move(x), bsam::Tensor({batch, 1}, std::move(y))};
}

inline bsam::Batch make_batch(const bsam::Tensor& x, std::vector<double> labels) {
  bsam::Batch b;
  b.features = x;
  b.labels = std::move(labels);
  return b;
}

}  // namespace fixtures
