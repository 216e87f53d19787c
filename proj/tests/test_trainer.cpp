#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "bsam/datagen.hpp"
#include "bsam/error.hpp"
#include "bsam/trainer.hpp"

using namespace bsam;

namespace {

RegressionDataset linear_data(std::size_t n) {
  RegressionDataset ds;
  ds.split = "train";
  ds.lower = 1.0;
  ds.upper = 3.0;
  ds.features = Tensor({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    ds.features.at(i, 0) = x;
    ds.labels.push_back(2.0 * x + 1.0);
  }
  return ds;
}

struct Stats {
  LabelHistogram hist;
  WeightTable weights;
  RegionMap regions;
};

Stats stats_of(const RegressionDataset& ds, std::size_t bins, std::size_t many, std::size_t few) {
  auto hist = build_histogram(ds.labels, ds.lower, ds.upper, bins);
  auto weights = compute_weights(hist, WeightMode::Sqinv);
  auto regions = assign_regions(hist, many, few);
  return {std::move(hist), std::move(weights), std::move(regions)};
}

RegressionDataset small_generated(std::uint64_t seed, DensityProfile::Kind kind = DensityProfile::Kind::Exponential) {
  DatasetSpec s;
  s.n_train = 600;
  s.n_test = 100;
  s.seed = seed;
  s.profile.kind = kind;
  return generate(s).first;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  LrSchedule c;
  CHECK(c.rate(0.1, 7) == 0.1);
  LrSchedule s{LrSchedule::Kind::StepDecay, 0.5, 3};
  for (std::size_t m = 0; m < 12; ++m) CHECK(s.rate(0.2, m) == 0.2 * std::pow(0.5, static_cast<double>(m / 3)));
  CHECK(s.rate(0.2, 2) == 0.2);
  CHECK(s.rate(0.2, 3) == 0.1);
}

TEST_CASE("epoch batches partition the data") {
  for (std::size_t bs : {1u, 7u, 32u, 100u}) {
    const auto batches = epoch_batches(100, bs, 3, 2);
    std::vector<int> seen(100, 0);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (b + 1 < batches.size()) CHECK(batches[b].size() == bs);
      for (auto i : batches[b]) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    CHECK(batches.size() == (100 + bs - 1) / bs);
  }
  CHECK(epoch_batches(50, 10, 1, 0) == epoch_batches(50, 10, 1, 0));
  CHECK(epoch_batches(50, 10, 1, 0) != epoch_batches(50, 10, 1, 1));
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const auto ds = small_generated(1);
  const auto st = stats_of(ds, 20, 60, 10);
  MlpModel m({4, 8, 1}, Activation::Tanh);
  m.init(3);
  const auto initial = m.params.values;
  TrainPlan plan;
  plan.learning_rate = 0.0;
  plan.optimizer = OptimizerKind::Bsam;
  const auto trace = train(plan, m, ds, nullptr, {&st.hist, &st.weights, &st.regions});
  CHECK(trace.final_params == initial);
  CHECK(trace.epoch_loss.size() == 1);
}

TEST_CASE("SGD on noiseless linear data lowers the MAE every epoch") {
  const auto ds = linear_data(64);
  const auto st = stats_of(ds, 4, 10, 2);
  MlpModel m({1, 1}, Activation::Relu);
  TrainPlan plan;
  plan.epochs = 5;
  plan.batch_size = 8;
  plan.learning_rate = 0.02;
  plan.validate_each_epoch = true;
  plan.metrics = {Metric::Mae};
  const auto trace = train(plan, m, ds, &ds, {&st.hist, nullptr, &st.regions});
  REQUIRE(trace.validation.size() == 5);
  double before = 2.0;  // MAE of the zero model on labels 2x + 1
  for (const auto& r : trace.validation) {
    CHECK(*r.all.mae < before);
    before = *r.all.mae;
  }
}

TEST_CASE("training is deterministic") {
  const auto ds = small_generated(2);
  const auto st = stats_of(ds, 20, 60, 10);
  TrainPlan plan;
  plan.epochs = 2;
  plan.optimizer = OptimizerKind::ImbSam;
  plan.perturbation.rho = 0.05;
  plan.update_weighting = WeightMode::Sqinv;
  plan.shuffle_seed = 11;
  auto run = [&] {
    MlpModel m({4, 8, 1}, Activation::Tanh);
    m.init(4);
    return train(plan, m, ds, nullptr, {&st.hist, &st.weights, &st.regions});
  };
  const auto a = run(), b = run();
  CHECK(a.final_params == b.final_params);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.backward_passes == b.backward_passes);
  CHECK(a.backward_passes == 2 * a.batches);
}

TEST_CASE("BSAM with a uniform table traces SAM exactly") {
  const auto ds = small_generated(3);
  const auto st = stats_of(ds, 20, 60, 10);
  const auto uniform = compute_weights(st.hist, WeightMode::Uniform);
  TrainPlan plan;
  plan.epochs = 2;
  plan.perturbation.rho = 0.1;
  plan.update_weighting = WeightMode::Inv;
  auto run = [&](OptimizerKind k) {
    MlpModel m({4, 6, 1}, Activation::Relu);
    m.init(5);
    TrainPlan p = plan;
    p.optimizer = k;
    return train(p, m, ds, nullptr, {&st.hist, &uniform, &st.regions});
  };
  const auto a = run(OptimizerKind::Sam), b = run(OptimizerKind::Bsam);
  CHECK(a.final_params == b.final_params);
  CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("divergence is reported with epoch and batch") {
  const auto ds = small_generated(4);
  const auto st = stats_of(ds, 20, 60, 10);
  TrainPlan plan;
  plan.learning_rate = 1e200;
  plan.batch_size = 50;
  MlpModel m({4, 4, 1}, Activation::Relu);
  m.init(1);
  try {
    train(plan, m, ds, nullptr, {&st.hist, nullptr, &st.regions});
    FAIL("expected DivergedError");
  } catch (const DivergedError& e) {
    CHECK(e.epoch() == 0);
    CHECK(e.batch() >= 2);
  }
}

TEST_CASE("plan validation") {
  const auto ds = small_generated(5);
  const auto st = stats_of(ds, 20, 60, 10);
  MlpModel m({4, 4, 1}, Activation::Relu);
  TrainPlan plan;
  plan.batch_size = ds.size() + 1;
  CHECK_THROWS_AS(train(plan, m, ds, nullptr, {&st.hist}), ContractError);
  plan.batch_size = 10;
  plan.epochs = 0;
  CHECK_THROWS_AS(train(plan, m, ds, nullptr, {&st.hist}), ContractError);
  plan.epochs = 1;
  CHECK_THROWS_AS(train(plan, m, ds, nullptr, {}), ContractError);
  const auto other = stats_of(small_generated(6).subset({0, 1, 2}), 20, 60, 10);
  CHECK_THROWS_AS(train(plan, m, ds, nullptr, {&other.hist}), ContractError);
}

TEST_CASE("a small MLP fits the balanced profile") {
  DatasetSpec s;
  s.n_train = 2000;
  s.n_test = 10;
  s.seed = 8;
  s.profile.kind = DensityProfile::Kind::Uniform;
  const auto ds = generate(s).first;
  const auto st = stats_of(ds, 20, 150, 30);
  MlpModel m({4, 32, 32, 1}, Activation::Tanh);
  m.init(2);
  TrainPlan plan;
  plan.epochs = 15;
  plan.batch_size = 32;
  plan.learning_rate = 0.05;
  train(plan, m, ds, nullptr, {&st.hist, nullptr, &st.regions});
  CHECK(mae(predict(m, ds.features), ds.labels) < 0.1 * (s.upper - s.lower));
}

TEST_CASE("checkpoint round trip") {
  MlpModel m({3, 5, 1}, Activation::Tanh);
  m.init(9);
  const auto j = checkpoint_json(m, {{"seed", 9}});
  CHECK(j.at("widths") == nlohmann::json::array({3, 5, 1}));
  CHECK(j.at("activation") == "tanh");
  CHECK(j.at("provenance").at("seed") == 9);
  const auto back = model_from_checkpoint(nlohmann::json::parse(j.dump()));
  CHECK(back.params.values == m.params.values);
  CHECK(back.widths() == m.widths());
  auto bad = j;
  bad["params"].erase(0);
  CHECK_THROWS_AS(model_from_checkpoint(bad), ContractError);
}
