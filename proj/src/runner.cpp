#include "bsam/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bsam/random.hpp"
#include "bsam/trainer.hpp"

namespace bsam {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string resolve_output_dir(const std::string& configured) {
  const fs::path p(configured);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return (fs::path(root) / p).string();
  return p.string();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

struct SeedData {
  RegressionDataset train;
  RegressionDataset test;
  std::uint64_t data_seed = 0;
};

SeedData load_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.dataset.from_csv()) {
    auto train = load_csv(cfg.dataset.train_csv, cfg.dataset.label_column, cfg.dataset.label_range);
    const std::pair<double, double> range{train.lower, train.upper};
    auto test = load_csv(cfg.dataset.test_csv, cfg.dataset.label_column, range);
    train.split = "train";
    test.split = "test";
    return {std::move(train), std::move(test), 0};
  }
  DatasetSpec spec = cfg.dataset.synthetic;
  if (cfg.dataset.vary_with_seed) spec.seed = derive_seed(spec.seed, derive_seed(seed, streams::kData));
  auto [train, test] = generate(spec);
  return {std::move(train), std::move(test), spec.seed};
}

std::vector<std::size_t> region_indices(const RegressionDataset& data, const LabelHistogram& hist,
                                        const RegionMap& regions, const std::string& subset) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.labels[i];
    if (y < hist.lower() || y > hist.upper()) continue;
    const Region r = regions.regions[hist.bin_of(y)];
    if (subset == "all" || to_string(r) == subset) idx.push_back(i);
  }
  return idx;
}

std::string cell_label(const std::string& name, double rho, std::uint64_t seed) {
  return name + "_rho" + format_number(rho) + "_seed" + std::to_string(seed);
}

nlohmann::json row_json(const ResultRow& row) {
  nlohmann::json j{{"optimizer", row.optimizer},
                   {"rho", row.rho},
                   {"seed", row.seed},
                   {"status", row.status},
                   {"batches", row.batches},
                   {"backward_passes", row.backward_passes},
                   {"epoch_loss", row.epoch_loss}};
  if (!row.message.empty()) j["message"] = row.message;
  if (row.status == "ok") j["report"] = row.report;
  if (row.sharpness) j["sharpness"] = *row.sharpness;
  return j;
}

}  // namespace

std::vector<std::string> results_columns(const ExperimentConfig& config) {
  std::vector<std::string> cols{"optimizer", "rho", "seed", "status"};
  for (Metric m : config.metrics) {
    for (const char* region : {"all", "many", "medium", "few"}) cols.push_back(to_string(m) + "_" + region);
  }
  cols.insert(cols.end(), {"lambda_max", "trace_h", "wall_s"});
  return cols;
}

std::string results_csv(const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  if (!config.deterministic) {
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << stamp << '\n';
  }
  const auto cols = results_columns(config);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.optimizer << ',' << format_number(r.rho) << ',' << r.seed << ',' << r.status;
    for (Metric m : config.metrics) {
      for (const MetricReport* rep : {&r.report.all, &r.report.many, &r.report.medium, &r.report.few}) {
        os << ',' << (r.status == "ok" ? opt(rep->get(m)) : std::string());
      }
    }
    os << ',' << (r.sharpness ? format_number(r.sharpness->lambda_max) : "");
    os << ',' << (r.sharpness ? format_number(r.sharpness->trace) : "");
    os << ',' << (config.deterministic ? "" : format_number(r.wall_seconds));
    os << '\n';
  }
  return os.str();
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.output_dir = resolve_output_dir(cfg.output_dir);
  const fs::path out(result.output_dir);
  prepare_dir(out);
  if (cfg.save_checkpoints) prepare_dir(out / "checkpoints");
  if (cfg.sharpness.enabled && !cfg.sharpness.slice_offsets.empty()) prepare_dir(out / "slices");
  prepare_dir(out / "histograms");

  nlohmann::json sharpness_json = nlohmann::json::array();

  for (const std::uint64_t seed : cfg.seeds) {
    const SeedData data = load_data(cfg, seed);
    const double lower = cfg.dataset.from_csv() ? data.train.lower : cfg.dataset.synthetic.lower;
    const double upper = cfg.dataset.from_csv() ? data.train.upper : cfg.dataset.synthetic.upper;
    const LabelHistogram hist = build_histogram(data.train.labels, lower, upper, cfg.bins);
    const RegionMap regions = assign_regions(hist, cfg.many_threshold, cfg.few_threshold);
    write_file(out / "histograms" / ("seed" + std::to_string(seed) + ".json"),
               histogram_json(hist, compute_weights(hist, WeightMode::Sqinv, cfg.normalize_weights)).dump(2) + "\n");

    std::vector<std::size_t> widths{data.train.dim()};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);

    for (const auto& entry : cfg.optimizers) {
      const WeightTable perturbation_weights = compute_weights(hist, entry.perturbation_weighting, cfg.normalize_weights);
      for (const double rho : entry.rhos) {
        ResultRow row;
        row.optimizer = entry.name;
        row.rho = rho;
        row.seed = seed;
        const std::string label = cell_label(entry.name, rho, seed);

        MlpModel model(widths, cfg.activation);
        model.init(derive_seed(seed, streams::kInit));
        TrainPlan plan = cfg.plan;
        plan.shuffle_seed = derive_seed(seed, streams::kShuffle);
        plan.optimizer = entry.kind;
        plan.perturbation = PerturbationSpec{rho, entry.p};
        plan.update_weighting = entry.update_weighting;
        plan.normalize_weights = cfg.normalize_weights;
        const TrainContext ctx{&hist, &perturbation_weights, &regions};

        const auto start = std::chrono::steady_clock::now();
        try {
          const TrainTrace trace = train(plan, model, data.train, &data.test, ctx);
          row.batches = trace.batches;
          row.backward_passes = trace.backward_passes;
          row.epoch_loss = trace.epoch_loss;
          row.report = region_report(predict(model, data.test.features), data.test.labels, hist, regions, cfg.metrics);

          if (cfg.sharpness.enabled) {
            const RegressionDataset& split = cfg.sharpness.split == "train" ? data.train : data.test;
            const auto idx = region_indices(split, hist, regions, cfg.sharpness.subset);
            const std::uint64_t diag_seed = derive_seed(seed, streams::kDiagnostics);
            if (!idx.empty()) {
              const RegressionDataset subset = split.subset(idx);
              SharpnessOptions opts;
              opts.power_iters = cfg.sharpness.power_iters;
              opts.tol = cfg.sharpness.tol;
              opts.probes = cfg.sharpness.probes;
              opts.seed = diag_seed;
              opts.subset = cfg.sharpness.subset;
              row.sharpness = sharpness(model, subset.features, subset.labels, plan.loss, opts);
            }
            if (!cfg.sharpness.slice_offsets.empty()) {
              const auto slice = loss_slice(model, split.features, split.labels, plan.loss, derive_seed(diag_seed, 99),
                                            cfg.sharpness.slice_offsets);
              write_file(out / "slices" / (label + ".csv"), loss_slice_csv(slice));
            }
          }
          if (cfg.save_checkpoints) {
            const nlohmann::json provenance{{"seed", seed},
                                            {"init_seed", derive_seed(seed, streams::kInit)},
                                            {"shuffle_seed", plan.shuffle_seed},
                                            {"data_seed", data.data_seed},
                                            {"optimizer", entry.name},
                                            {"rho", rho}};
            write_file(out / "checkpoints" / (label + ".json"), checkpoint_json(model, provenance).dump() + "\n");
          }
        } catch (const DivergedError& e) {
          row.status = "diverged";
          row.message = e.what();
        } catch (const IoError&) {
          throw;
        } catch (const Error& e) {
          row.status = "error";
          row.message = e.what();
        }
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (row.status != "ok") std::cerr << "warning: " << label << ": " << row.message << '\n';
        if (row.sharpness) {
          nlohmann::json sj = *row.sharpness;
          sj["optimizer"] = entry.name;
          sj["rho"] = rho;
          sj["run_seed"] = seed;
          sharpness_json.push_back(std::move(sj));
        }
        result.rows.push_back(std::move(row));
      }
    }
  }

  write_file(out / "results.csv", results_csv(cfg, result.rows));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) rows.push_back(row_json(r));
  write_file(out / "results.json",
             nlohmann::json{{"name", cfg.name}, {"schema_version", cfg.schema_version}, {"rows", rows}}.dump(2) + "\n");
  if (cfg.sharpness.enabled) write_file(out / "sharpness.json", sharpness_json.dump(2) + "\n");
  return result;
}

}  // namespace bsam
