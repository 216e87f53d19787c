#include "bsam/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bsam/error.hpp"

namespace bsam {

namespace {

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

[[noreturn]] void fail(const std::string& field, const YAML::Node& node, const std::string& msg) {
  throw ConfigError("config field '" + field + "'" + where(node) + ": " + msg);
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(path, node, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, kv.first, "unknown key");
  }
}

template <class T>
T as(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(field, node, "invalid value '" + YAML::Dump(node) + "'");
  }
}

template <class T>
void read(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) {
  const auto node = parent[key];
  if (node) out = as<T>(node, path + key);
}

template <class Fn>
auto parse_with(const YAML::Node& node, const std::string& field, Fn&& fn) {
  try {
    return fn(as<std::string>(node, field));
  } catch (const ContractError& e) {
    fail(field, node, e.what());
  }
}

void read_dataset(const YAML::Node& n, DatasetConfig& d) {
  check_keys(n, "dataset",
             {"kind", "n_train", "n_test", "label_range", "profile", "feature_map", "noise_sigma", "seed",
              "vary_with_seed", "train_csv", "test_csv", "label_column"});
  const std::string kind = n["kind"] ? as<std::string>(n["kind"], "dataset.kind") : "synthetic";
  if (kind != "synthetic" && kind != "csv") fail("dataset.kind", n["kind"], "expected synthetic or csv");
  auto& s = d.synthetic;
  read(n, "n_train", "dataset.", s.n_train);
  read(n, "n_test", "dataset.", s.n_test);
  read(n, "noise_sigma", "dataset.", s.noise_sigma);
  read(n, "seed", "dataset.", s.seed);
  read(n, "vary_with_seed", "dataset.", d.vary_with_seed);
  read(n, "label_column", "dataset.", d.label_column);
  if (const auto r = n["label_range"]) {
    const auto v = as<std::vector<double>>(r, "dataset.label_range");
    if (v.size() != 2) fail("dataset.label_range", r, "expected [lower, upper]");
    s.lower = v[0];
    s.upper = v[1];
    d.label_range = std::make_pair(v[0], v[1]);
  }
  if (const auto p = n["profile"]) {
    check_keys(p, "dataset.profile", {"kind", "rate", "alpha", "mix", "centers", "widths"});
    if (p["kind"]) s.profile.kind = parse_with(p["kind"], "dataset.profile.kind", DensityProfile::parse_kind);
    read(p, "rate", "dataset.profile.", s.profile.rate);
    read(p, "alpha", "dataset.profile.", s.profile.alpha);
    read(p, "mix", "dataset.profile.", s.profile.mix);
    if (p["centers"]) {
      const auto c = as<std::vector<double>>(p["centers"], "dataset.profile.centers");
      if (c.size() != 2) fail("dataset.profile.centers", p["centers"], "expected two values");
      s.profile.centers = {c[0], c[1]};
    }
    if (p["widths"]) {
      const auto w = as<std::vector<double>>(p["widths"], "dataset.profile.widths");
      if (w.size() != 2) fail("dataset.profile.widths", p["widths"], "expected two values");
      s.profile.widths = {w[0], w[1]};
    }
  }
  if (const auto f = n["feature_map"]) {
    check_keys(f, "dataset.feature_map", {"kind", "dim"});
    if (f["kind"]) s.feature_map.kind = parse_with(f["kind"], "dataset.feature_map.kind", FeatureMap::parse_kind);
    read(f, "dim", "dataset.feature_map.", s.feature_map.dim);
  }
  if (kind == "csv") {
    if (!n["train_csv"] || !n["test_csv"]) fail("dataset", n, "csv datasets need train_csv and test_csv");
    d.train_csv = as<std::string>(n["train_csv"], "dataset.train_csv");
    d.test_csv = as<std::string>(n["test_csv"], "dataset.test_csv");
  }
}

void read_train(const YAML::Node& n, TrainPlan& plan) {
  check_keys(n, "train", {"epochs", "batch_size", "lr", "schedule", "loss", "weight_decay", "validate_each_epoch"});
  read(n, "epochs", "train.", plan.epochs);
  read(n, "batch_size", "train.", plan.batch_size);
  read(n, "lr", "train.", plan.learning_rate);
  read(n, "weight_decay", "train.", plan.weight_decay);
  read(n, "validate_each_epoch", "train.", plan.validate_each_epoch);
  if (n["loss"]) plan.loss = parse_with(n["loss"], "train.loss", parse_loss_kind);
  if (const auto s = n["schedule"]) {
    check_keys(s, "train.schedule", {"kind", "gamma", "every"});
    const std::string kind = s["kind"] ? as<std::string>(s["kind"], "train.schedule.kind") : "constant";
    if (kind == "constant") {
      plan.schedule.kind = LrSchedule::Kind::Constant;
    } else if (kind == "step") {
      plan.schedule.kind = LrSchedule::Kind::StepDecay;
    } else {
      fail("train.schedule.kind", s["kind"], "expected constant or step");
    }
    read(s, "gamma", "train.schedule.", plan.schedule.gamma);
    read(s, "every", "train.schedule.", plan.schedule.every);
  }
}

OptimizerEntry read_optimizer(const YAML::Node& n, std::size_t index) {
  const std::string path = "optimizers[" + std::to_string(index) + "]";
  check_keys(n, path, {"name", "kind", "rho", "p", "perturbation_weighting", "update_weighting"});
  OptimizerEntry e;
  if (!n["kind"]) fail(path + ".kind", n, "missing");
  e.kind = parse_with(n["kind"], path + ".kind", parse_optimizer_kind);
  e.name = n["name"] ? as<std::string>(n["name"], path + ".name") : to_string(e.kind);
  if (const auto r = n["rho"]) {
    e.rhos = r.IsSequence() ? as<std::vector<double>>(r, path + ".rho") : std::vector<double>{as<double>(r, path + ".rho")};
  } else {
    e.rhos = {e.kind == OptimizerKind::Sgd ? 0.0 : 0.05};
  }
  if (e.kind == OptimizerKind::Sgd && (e.rhos.size() != 1 || e.rhos[0] != 0.0)) {
    fail(path + ".rho", n["rho"], "sgd takes no perturbation radius");
  }
  if (const auto p = n["p"]) {
    const auto text = as<std::string>(p, path + ".p");
    e.p = (text == "inf" || text == ".inf") ? kInfinity : as<double>(p, path + ".p");
  }
  if (n["perturbation_weighting"]) {
    e.perturbation_weighting = parse_with(n["perturbation_weighting"], path + ".perturbation_weighting", parse_weight_mode);
  }
  if (n["update_weighting"]) {
    const auto text = as<std::string>(n["update_weighting"], path + ".update_weighting");
    e.update_weighting = text == "none" ? WeightMode::Uniform
                                        : parse_with(n["update_weighting"], path + ".update_weighting", parse_weight_mode);
  }
  return e;
}

void read_sharpness(const YAML::Node& n, SharpnessConfig& s) {
  check_keys(n, "sharpness", {"enabled", "power_iters", "tol", "probes", "subset", "split", "slice_offsets"});
  read(n, "enabled", "sharpness.", s.enabled);
  read(n, "power_iters", "sharpness.", s.power_iters);
  read(n, "tol", "sharpness.", s.tol);
  read(n, "probes", "sharpness.", s.probes);
  read(n, "subset", "sharpness.", s.subset);
  read(n, "split", "sharpness.", s.split);
  read(n, "slice_offsets", "sharpness.", s.slice_offsets);
  if (s.subset != "all" && s.subset != "many" && s.subset != "medium" && s.subset != "few") {
    fail("sharpness.subset", n["subset"], "expected all, many, medium or few");
  }
  if (s.split != "test" && s.split != "train") fail("sharpness.split", n["split"], "expected test or train");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (optimizers.empty()) throw ConfigError("config needs at least one optimizer");
  if (seeds.empty()) throw ConfigError("config needs at least one seed");
  if (bins == 0) throw ConfigError("bins must be positive");
  if (few_threshold == 0 || few_threshold > many_threshold) {
    throw ConfigError("region thresholds need 0 < few_threshold <= many_threshold");
  }
  for (auto w : hidden) {
    if (w == 0) throw ConfigError("hidden widths must be positive");
  }
  if (plan.epochs == 0 || plan.batch_size == 0) throw ConfigError("epochs and batch_size must be positive");
  std::set<std::string> names;
  for (const auto& o : optimizers) {
    if (!names.insert(o.name).second) throw ConfigError("duplicate optimizer name '" + o.name + "'");
    if (o.rhos.empty()) throw ConfigError("optimizer '" + o.name + "' has an empty rho list");
    for (double r : o.rhos) {
      try {
        PerturbationSpec{r, o.p}.validate();
      } catch (const ContractError& e) {
        throw ConfigError("optimizer '" + o.name + "': " + e.what());
      }
    }
  }
  if (!dataset.from_csv()) {
    try {
      dataset.synthetic.validate();
    } catch (const ContractError& e) {
      throw ConfigError(std::string("dataset: ") + e.what());
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ": parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw ConfigError(source + ": expected a mapping at top level");

  ExperimentConfig cfg;
  check_keys(root, "",
             {"schema_version", "name", "dataset", "bins", "regions", "weights", "model", "train", "optimizers",
              "seeds", "metrics", "sharpness", "output_dir", "results"});
  if (!root["schema_version"]) throw ConfigError(source + ": missing schema_version");
  read(root, "schema_version", "", cfg.schema_version);
  read(root, "name", "", cfg.name);
  read(root, "bins", "", cfg.bins);
  read(root, "output_dir", "", cfg.output_dir);
  if (const auto n = root["dataset"]) read_dataset(n, cfg.dataset);
  if (const auto n = root["regions"]) {
    check_keys(n, "regions", {"many_threshold", "few_threshold"});
    read(n, "many_threshold", "regions.", cfg.many_threshold);
    read(n, "few_threshold", "regions.", cfg.few_threshold);
  }
  if (const auto n = root["weights"]) {
    check_keys(n, "weights", {"normalize"});
    read(n, "normalize", "weights.", cfg.normalize_weights);
  }
  if (const auto n = root["model"]) {
    check_keys(n, "model", {"hidden", "activation"});
    read(n, "hidden", "model.", cfg.hidden);
    if (n["activation"]) cfg.activation = parse_with(n["activation"], "model.activation", parse_activation);
  }
  if (const auto n = root["train"]) read_train(n, cfg.plan);
  if (const auto n = root["optimizers"]) {
    if (!n.IsSequence()) fail("optimizers", n, "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) cfg.optimizers.push_back(read_optimizer(n[i], i));
  }
  if (const auto n = root["seeds"]) cfg.seeds = as<std::vector<std::uint64_t>>(n, "seeds");
  if (const auto n = root["metrics"]) {
    cfg.metrics.clear();
    if (!n.IsSequence()) fail("metrics", n, "expected a list");
    for (const auto& m : n) cfg.metrics.push_back(parse_with(m, "metrics", parse_metric));
    cfg.plan.metrics = cfg.metrics;
  }
  if (const auto n = root["sharpness"]) read_sharpness(n, cfg.sharpness);
  if (const auto n = root["results"]) {
    check_keys(n, "results", {"deterministic", "save_checkpoints"});
    read(n, "deterministic", "results.", cfg.deterministic);
    read(n, "save_checkpoints", "results.", cfg.save_checkpoints);
  }
  cfg.plan.metrics = cfg.metrics;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace bsam
