// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "metric_fixture.hpp"
#include "oracles.hpp"

#include "bsam/config.hpp"
#include "bsam/imbalance.hpp"
#include "bsam/metrics.hpp"
#include "bsam/objective.hpp"
#include "bsam/optimizers.hpp"
#include "bsam/random.hpp"
#include "bsam/runner.hpp"
#include "bsam/sharpness.hpp"

using namespace bsam;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// ---------------------------------------------------------------- gradients

Outcome gradients() {
  Outcome out;
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 1 + seed % 4;
    std::vector<std::size_t> widths{d};
    if (seed % 2 == 0) {
      widths.push_back(3 + seed % 5);
    } else {
      widths.insert(widths.end(), {4, 3});
    }
    widths.push_back(1);
    const auto act = seed % 3 == 0 ? Activation::Relu : Activation::Tanh;
    auto model = fixtures::seeded_model(widths, act, 100 + seed);
    if (model.num_params() > 100) throw std::logic_error("gradient model too large");
    const std::size_t B = 8 + seed;
    const Tensor x = fixtures::random_inputs(B, d, 200 + seed);
    const auto y = fixtures::random_labels(B, -2, 2, 300 + seed);
    const auto w = fixtures::random_labels(B, 0.1, 3.0, 400 + seed);
    for (auto kind : {LossKind::L1, LossKind::L2}) {
      for (bool weighted : {false, true}) {
        const std::vector<double> weights = weighted ? w : std::vector<double>{};
        const LossObjective obj(model, x, Tensor({B, 1}, y), kind, weights);
        std::vector<double> g(obj.dim());
        obj.gradient(model.params.values, g);
        const auto fd = oracle::fd_gradient_ld(
            [&](const std::vector<double>& t) {
              return oracle::mlp_loss_ld(widths, act == Activation::Tanh, t, x.data, y, weights, kind == LossKind::L1);
            },
            model.params.values);
        worst = std::max(worst, oracle::max_rel_error(g, fd));
        ++cases;
      }
    }
  }
  out.pass = worst < 1e-5;
  out.detail = std::to_string(cases) + " cases, max rel error " + fmt("%.3g", worst);
  return out;
}

// ------------------------------------------------------------- perturbation

Outcome perturbation() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
  PerturbationSpec spec;
  spec.rho = 0.05;
  double norm_err = 0.0, scale_err = 0.0, worst_gap = -INFINITY;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 50);
    const auto g = oracle::gaussian_vector(n, rng, std::exp(log_scale(rng)));
    const auto eps = compute_perturbation(g, spec);
    norm_err = std::max(norm_err, std::abs(oracle::norm2(eps) - spec.rho));

    auto scaled = g;
    const double c = std::exp(log_scale(rng));
    for (auto& e : scaled) e *= c;
    const auto eps_scaled = compute_perturbation(scaled, spec);
    for (std::size_t i = 0; i < n; ++i) scale_err = std::max(scale_err, std::abs(eps[i] - eps_scaled[i]));

    const double best = oracle::dot(eps, g);
    for (int r = 0; r < 10000; ++r) {
      auto v = oracle::gaussian_vector(n, rng);
      const double s = spec.rho / oracle::norm2(v);
      double lin = 0.0;
      for (std::size_t i = 0; i < n; ++i) lin += v[i] * s * g[i];
      worst_gap = std::max(worst_gap, lin - best);
    }
  }
  Outcome out;
  out.pass = norm_err <= 1e-9 && scale_err <= 1e-12 && worst_gap <= 1e-9;
  out.detail = "norm err " + fmt("%.2g", norm_err) + ", scale err " + fmt("%.2g", scale_err) +
               ", best random minus eps* " + fmt("%.3g", worst_gap);
  return out;
}

// ---------------------------------------------------------------- reductions

struct Imbalanced {
  Tensor x;
  std::vector<double> y;
  LabelHistogram hist;
  WeightTable weights;
  RegionMap regions;
};

Imbalanced imbalanced(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(3.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> y(n);
  for (auto& v : y) v = std::min(e(rng), 2.0);
  Tensor x({n, 3});
  for (std::size_t i = 0; i < n; ++i) {
    x.at(i, 0) = std::sin(y[i]) + noise(rng);
    x.at(i, 1) = std::cos(2 * y[i]) + noise(rng);
    x.at(i, 2) = y[i] * y[i] + noise(rng);
  }
  auto hist = build_histogram(y, 0, 2, 10);
  auto weights = compute_weights(hist, WeightMode::Sqinv);
  auto regions = assign_regions(hist, 40, 10);
  return {std::move(x), std::move(y), std::move(hist), std::move(weights), std::move(regions)};
}

Batch rows_of(const Imbalanced& s, const std::vector<std::size_t>& rows) {
  Batch b;
  b.features = Tensor({rows.size(), 3});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) b.features.at(i, c) = s.x.at(rows[i], c);
    b.labels.push_back(s.y[rows[i]]);
  }
  return b;
}

Batch window(const Imbalanced& s, std::size_t start, std::size_t size) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < size; ++i) rows.push_back((start + i) % s.y.size());
  return rows_of(s, rows);
}

Outcome reductions() {
  Outcome out;
  std::vector<std::string> failed;
  const auto s = imbalanced(1, 400);
  PerturbationSpec zero;
  zero.rho = 0.0;
  PerturbationSpec spec;
  spec.rho = 0.05;

  // rho = 0, both losses
  for (auto kind : {LossKind::L2, LossKind::L1}) {
    const auto base = fixtures::seeded_model({3, 8, 1}, Activation::Tanh, 2);
    std::vector<MlpModel> m(4, base);
    std::vector<OptimizerState> st(4);
    for (auto& e : st) e.learning_rate = 0.05;
    for (std::size_t step = 0; step < 100; ++step) {
      const Batch b = window(s, step * 16, 16);
      sgd_step(m[0], b, kind, st[0]);
      sam_step(m[1], b, kind, zero, st[1]);
      bsam_step(m[2], b, kind, zero, s.weights, s.hist, st[2]);
      imbsam_step(m[3], b, kind, zero, s.regions, s.hist, st[3]);
    }
    const std::string tag = kind == LossKind::L2 ? "l2" : "l1";
    if (m[1].params.values != m[0].params.values) failed.push_back("sam(rho=0)!=sgd/" + tag);
    if (m[2].params.values != m[0].params.values) failed.push_back("bsam(rho=0)!=sgd/" + tag);
    if (m[3].params.values != m[0].params.values) failed.push_back("imbsam(rho=0)!=sgd/" + tag);
  }

  // uniform weights
  {
    const auto uniform = compute_weights(s.hist, WeightMode::Uniform);
    auto a = fixtures::seeded_model({3, 8, 1}, Activation::Relu, 3);
    auto b = a;
    OptimizerState sa, sb;
    sa.learning_rate = sb.learning_rate = 0.05;
    for (std::size_t step = 0; step < 100; ++step) {
      const Batch batch = window(s, step * 13, 13);
      sam_step(a, batch, LossKind::L2, spec, sa);
      bsam_step(b, batch, LossKind::L2, spec, uniform, s.hist, sb);
    }
    if (a.params.values != b.params.values) failed.push_back("bsam(uniform)!=sam");
  }

  // all-Few batches
  {
    std::vector<std::size_t> few;
    for (std::size_t i = 0; i < s.y.size(); ++i)
      if (s.regions.regions[s.hist.bin_of(s.y[i])] == Region::Few) few.push_back(i);
    auto a = fixtures::seeded_model({3, 6, 1}, Activation::Tanh, 5);
    auto b = a;
    OptimizerState sa, sb;
    sa.learning_rate = sb.learning_rate = 0.05;
    for (std::size_t step = 0; step < 100; ++step) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < 8; ++i) rows.push_back(few[(step * 8 + i) % few.size()]);
      const Batch batch = rows_of(s, rows);
      sam_step(a, batch, LossKind::L2, spec, sa);
      imbsam_step(b, batch, LossKind::L2, spec, s.regions, s.hist, sb);
    }
    if (few.empty() || a.params.values != b.params.values) failed.push_back("imbsam(all-few)!=sam");
  }

  out.pass = failed.empty();
  if (out.pass) {
    out.detail = "rho=0 chain, uniform BSAM and all-Few ImbSAM bitwise equal over 100 steps";
  } else {
    for (const auto& f : failed) out.detail += f + " ";
  }
  return out;
}

// ------------------------------------------------------------- reweighting

Outcome reweighting() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t K = 2 + seed % 9;
    const std::size_t N = 5 + seed * 4;
    const double lo = -1.0, hi = 4.0;
    std::vector<double> labels(N), losses(N);
    for (std::size_t i = 0; i < N; ++i) {
      labels[i] = lo + std::pow(u(rng), 2.0) * (hi - lo);
      losses[i] = u(rng) * 3.0;
    }
    const auto h = build_histogram(labels, lo, hi, K);
    const auto w = sample_weights(h, compute_weights(h, WeightMode::Inv, false), labels);
    double lhs = 0.0;
    for (std::size_t i = 0; i < N; ++i) lhs += w[i] * static_cast<double>(N) / static_cast<double>(K) * losses[i];
    lhs /= static_cast<double>(N);

    // Per-bin means by a double loop, with bins from the raw edges.
    double rhs = 0.0;
    const double width = (hi - lo) / static_cast<double>(K);
    for (std::size_t k = 0; k < K; ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < N; ++i) {
        auto bin = static_cast<std::size_t>((labels[i] - lo) / width);
        if (bin >= K) bin = K - 1;
        if (bin == k) {
          sum += losses[i];
          ++n;
        }
      }
      if (n > 0) rhs += sum / static_cast<double>(n) / static_cast<double>(K);
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {worst <= 1e-12, "50 datasets, max abs difference " + fmt("%.3g", worst)};
}

// ------------------------------------------------------------------ metrics

Outcome metrics() {
  namespace fx = metric_fixture;
  Outcome out;
  const LabelHistogram h(fx::kLower, fx::kUpper, fx::kBins);
  std::vector<std::string> off;
  if (mae(fx::pred, fx::truth) != fx::kMae) off.push_back("mae");
  if (rmse(fx::pred, fx::truth) != fx::rmse()) off.push_back("rmse");
  if (delta1(fx::pred, fx::truth) != fx::kDelta1) off.push_back("delta1");
  if (bmae(fx::pred, fx::truth, h) != fx::kBmae) off.push_back("bmae");
  const double g = gm(fx::pred, fx::truth);
  const double gm_rel = std::abs(g - fx::gm()) / fx::gm();
  if (gm_rel > 1e-15) off.push_back("gm");

  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> len(1, 40);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::size_t violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = len(rng);
    std::vector<double> p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = val(rng);
      // every tenth input has exact ties
      p[i] = t % 10 == 0 ? y[i] : val(rng);
    }
    const double m = mae(p, y);
    if (!(gm(p, y) <= (m + kGmEpsilon) * (1 + 1e-12))) ++violations;
    if (!(m <= rmse(p, y))) ++violations;
  }
  out.pass = off.empty() && violations == 0;
  out.detail = "fixture mismatches: " + (off.empty() ? std::string("none") : off.front()) +
               " (gm rel diff " + fmt("%.2g", gm_rel) + "), property violations " + std::to_string(violations) +
               "/10000";
  return out;
}

// ---------------------------------------------------------------- sharpness

Outcome sharpness_oracles() {
  double worst_lambda = 0.0, worst_trace = 0.0;
  std::size_t max_params = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = fixtures::tiny_regression(seed);
    const LossObjective obj(t.model, t.x, t.y, LossKind::L2);
    max_params = std::max(max_params, obj.dim());
    const auto H = oracle::fd_hessian(
        [&](const std::vector<double>& th) {
          std::vector<double> g(th.size());
          obj.gradient(th, g);
          return g;
        },
        t.model.params.values);
    const double ref_lambda = oracle::largest_magnitude(oracle::jacobi_eigenvalues(H, obj.dim()));
    const double ref_trace = oracle::dense_trace(H, obj.dim());
    const std::uint64_t diag = derive_seed(seed, streams::kDiagnostics);
    const auto power = lambda_max(obj, t.model.params.values, 5000, 1e-12, diag);
    const auto est = hessian_trace(obj, t.model.params.values, 1000, derive_seed(diag, 1));
    worst_lambda = std::max(worst_lambda, std::abs(power.lambda_max - ref_lambda) / std::abs(ref_lambda));
    worst_trace = std::max(worst_trace, std::abs(est.trace - ref_trace) / std::abs(ref_trace));
  }
  Outcome out;
  out.pass = max_params <= 50 && worst_lambda <= 1e-3 && worst_trace <= 0.05;
  out.detail = "10 MLPs of " + std::to_string(max_params) + " params, lambda_max rel err " +
               fmt("%.3g", worst_lambda) + ", trace rel err " + fmt("%.3g", worst_trace);
  return out;
}

// ------------------------------------------------------------------ presets

fs::path scratch_root() {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / "acceptance";
  return fs::temp_directory_path() / "bsam-acceptance";
}

struct PresetRun {
  RunResult result;
  std::string csv;
  double seconds = 0.0;
};

PresetRun run_preset(const std::string& name, const fs::path& dir) {
  ExperimentConfig cfg = parse_config(preset_config(name), name);
  cfg.output_dir = dir.string();
  PresetRun run;
  const auto start = std::chrono::steady_clock::now();
  run.result = run_experiment(cfg);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ifstream in(dir / "results.csv", std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  run.csv = os.str();
  return run;
}

const ResultRow* find_row(const RunResult& r, const std::string& name, std::uint64_t seed) {
  for (const auto& row : r.rows)
    if (row.optimizer == name && row.seed == seed) return &row;
  return nullptr;
}

Outcome trend(const PresetRun& run) {
  std::size_t few_wins = 0, all_close = 0, seeds = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto* bsam = find_row(run.result, "bsam", seed);
    const auto* sgd = find_row(run.result, "sgd", seed);
    const auto* sam = find_row(run.result, "sam", seed);
    if (!bsam || !sgd || !sam || bsam->status != "ok" || sgd->status != "ok" || sam->status != "ok") continue;
    ++seeds;
    const double b_few = *bsam->report.few.mae, s_few = *sgd->report.few.mae;
    const double b_all = *bsam->report.all.mae, sam_all = *sam->report.all.mae;
    few_wins += b_few < s_few;
    all_close += b_all <= sam_all * 1.02;
    per_seed << " s" << seed << "[few " << fmt("%.4f", b_few) << "/" << fmt("%.4f", s_few) << ", all "
             << fmt("%.4f", b_all) << "/" << fmt("%.4f", sam_all) << "]";
  }
  Outcome out;
  out.pass = seeds == 5 && few_wins >= 4 && all_close >= 3 && run.seconds < 900.0;
  out.detail = "few MAE below SGD in " + std::to_string(few_wins) + "/5, all MAE within 2% of SAM in " +
               std::to_string(all_close) + "/5, preset " + fmt("%.1f", run.seconds) + " s;" + per_seed.str();
  return out;
}

Outcome sharpness_trend(const PresetRun& run) {
  double b_lambda = 0, b_trace = 0, s_lambda = 0, s_trace = 0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto* bsam = find_row(run.result, "bsam", seed);
    const auto* base = find_row(run.result, "sgd_sqinv", seed);
    if (!bsam || !base || !bsam->sharpness || !base->sharpness) continue;
    b_lambda += bsam->sharpness->lambda_max;
    b_trace += bsam->sharpness->trace;
    s_lambda += base->sharpness->lambda_max;
    s_trace += base->sharpness->trace;
    ++n;
  }
  Outcome out;
  if (n != 5) return {false, "missing sharpness rows"};
  out.pass = b_lambda < s_lambda && b_trace < s_trace;
  out.detail = "few-shot lambda_max " + fmt("%.3f", b_lambda / 5) + " vs " + fmt("%.3f", s_lambda / 5) +
               ", trace " + fmt("%.3f", b_trace / 5) + " vs " + fmt("%.3f", s_trace / 5) + " (BSAM vs SGD+SQINV)";
  return out;
}

Outcome rho_sweep(const PresetRun& run) {
  std::map<std::string, std::vector<double>> seen;
  std::size_t bad = 0;
  for (const auto& row : run.result.rows) {
    if (row.optimizer == "sgd_sqinv") continue;
    seen[row.optimizer].push_back(row.rho);
    if (row.status != "ok" || row.batches == 0 || row.backward_passes != 2 * row.batches) ++bad;
  }
  const std::vector<double> want{0.05, 0.1, 0.2};
  bool complete = seen.size() == 3;
  for (const char* name : {"sam", "imbsam", "bsam"}) complete = complete && seen[name] == want;
  const bool csv_rows = std::count(run.csv.begin(), run.csv.end(), '\n') == 1 + 1 + 9;
  return {complete && bad == 0 && csv_rows,
          std::string(complete ? "3x3 sweep complete" : "sweep incomplete") + ", " + std::to_string(bad) +
              " cells not ok or not at 2 passes per batch"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check, double budget_s = 0) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0 && secs >= budget_s) {
      o.pass = false;
      o.detail += " [over budget " + fmt("%.0f", budget_s) + " s]";
    }
    failures += !o.pass;
    std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "gradient oracle", gradients, 10.0);
  report(2, "perturbation contract", perturbation);
  report(3, "reduction chain", reductions);
  report(4, "reweighting identity", reweighting);
  report(5, "metric fixtures", metrics);
  report(6, "sharpness oracles", sharpness_oracles, 60.0);

  const fs::path root = scratch_root();
  std::error_code ec;
  fs::remove_all(root, ec);
  std::map<std::string, PresetRun> first, second;
  std::string preset_error;
  try {
    for (const auto& name : preset_names()) first[name] = run_preset(name, root / "first" / name);
  } catch (const std::exception& e) {
    preset_error = e.what();
  }
  auto preset_check = [&](const std::string& name, auto fn) {
    return [&, name, fn]() -> Outcome {
      if (!first.count(name)) return {false, "preset failed: " + preset_error};
      return fn(first.at(name));
    };
  };
  report(7, "trend vs baselines", preset_check("bsam-vs-baselines", trend));
  report(8, "sharpness trend", preset_check("bsam-vs-baselines", sharpness_trend));
  report(9, "rho ablation", preset_check("rho-ablation", rho_sweep));
  report(10, "determinism", [&]() -> Outcome {
    if (first.size() != preset_names().size()) return {false, "preset failed: " + preset_error};
    std::string detail;
    bool same = true;
    for (const auto& name : preset_names()) {
      const auto again = run_preset(name, root / "second" / name);
      const bool eq = again.csv == first.at(name).csv && !again.csv.empty();
      same = same && eq;
      detail += name + (eq ? " identical; " : " DIFFERS; ");
    }
    return {same, detail};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
