#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bsam/config.hpp"
#include "bsam/error.hpp"
#include "bsam/runner.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  const bsam::ExperimentConfig cfg = bsam::load_config(config_path);
  const auto result = bsam::run_experiment(cfg);
  std::size_t ok = 0;
  for (const auto& r : result.rows) ok += r.status == "ok";
  std::cout << "wrote " << result.rows.size() << " rows (" << ok << " ok) to " << result.output_dir << "/results.csv\n";
  return 0;
}

int cmd_compare(const std::string& csv_path, const std::string& baseline, const std::string& candidate,
                const std::string& out_path) {
  std::ifstream in(csv_path);
  if (!in) throw bsam::IoError("cannot open '" + csv_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rows = bsam::compare_results(ss.str(), baseline, candidate);
  std::string target = out_path;
  if (target.empty()) {
    auto name = "compare_" + baseline + "_vs_" + candidate + ".csv";
    target = (std::filesystem::path(csv_path).parent_path() / name).string();
  }
  std::ofstream out(target);
  if (!out) throw bsam::IoError("cannot write '" + target + "'");
  out << bsam::compare_csv(rows);
  std::cout << bsam::compare_table(rows, baseline, candidate);
  return 0;
}

int cmd_gen_config(const std::string& preset, const std::string& out_path) {
  const std::string text = bsam::preset_config(preset);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  const std::filesystem::path parent = std::filesystem::path(out_path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(out_path);
  if (!out) throw bsam::IoError("cannot write '" + out_path + "'");
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced sharpness-aware minimization experiments for imbalanced regression"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run every optimizer/rho/seed cell of an experiment config");
  run->add_option("config", config_path, "experiment config (YAML)")->required();

  std::string csv_path, baseline, candidate, compare_out;
  auto* compare = app.add_subcommand("compare", "mean-over-seeds comparison of two optimizers in a results.csv");
  compare->add_option("results", csv_path, "results.csv written by run")->required();
  compare->add_option("baseline", baseline, "baseline optimizer name (optionally name@rho)")->required();
  compare->add_option("candidate", candidate, "candidate optimizer name (optionally name@rho)")->required();
  compare->add_option("-o,--output", compare_out, "CSV output path (default: next to results.csv)");

  std::string preset, gen_out;
  auto* gen = app.add_subcommand("gen-config", "print a preset experiment config");
  std::string names;
  for (const auto& n : bsam::preset_names()) names += (names.empty() ? "" : ", ") + n;
  gen->add_option("preset", preset, "one of: " + names)->required();
  gen->add_option("-o,--output", gen_out, "write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*compare) return cmd_compare(csv_path, baseline, candidate, compare_out);
    if (*gen) return cmd_gen_config(preset, gen_out);
  } catch (const bsam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
