#include "bsam/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "bsam/error.hpp"
#include "bsam/random.hpp"

namespace bsam {

void DensityProfile::validate() const {
  switch (kind) {
    case Kind::Uniform:
      break;
    case Kind::Exponential:
      if (!(rate > 0.0) || !std::isfinite(rate)) throw ContractError("exponential profile needs rate > 0");
      break;
    case Kind::ParetoTail:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractError("pareto profile needs alpha > 0");
      break;
    case Kind::TwoMode:
      if (!(mix >= 0.0 && mix <= 1.0)) throw ContractError("two-mode profile needs mix in [0, 1]");
      for (int i = 0; i < 2; ++i) {
        if (!(centers[i] >= 0.0 && centers[i] <= 1.0)) throw ContractError("two-mode centers must lie in [0, 1]");
        if (!(widths[i] > 0.0)) throw ContractError("two-mode widths must be positive");
      }
      break;
  }
}

DensityProfile::Kind DensityProfile::parse_kind(const std::string& s) {
  if (s == "uniform") return Kind::Uniform;
  if (s == "exponential") return Kind::Exponential;
  if (s == "pareto") return Kind::ParetoTail;
  if (s == "two_mode") return Kind::TwoMode;
  throw ContractError("unknown density profile '" + s + "'");
}

std::string to_string(DensityProfile::Kind k) {
  switch (k) {
    case DensityProfile::Kind::Uniform:
      return "uniform";
    case DensityProfile::Kind::Exponential:
      return "exponential";
    case DensityProfile::Kind::ParetoTail:
      return "pareto";
    case DensityProfile::Kind::TwoMode:
      return "two_mode";
  }
  return "?";
}

FeatureMap::Kind FeatureMap::parse_kind(const std::string& s) {
  if (s == "linear") return Kind::Linear;
  if (s == "trig") return Kind::Trig;
  if (s == "poly") return Kind::Poly;
  throw ContractError("unknown feature map '" + s + "'");
}

std::string to_string(FeatureMap::Kind k) {
  switch (k) {
    case FeatureMap::Kind::Linear:
      return "linear";
    case FeatureMap::Kind::Trig:
      return "trig";
    case FeatureMap::Kind::Poly:
      return "poly";
  }
  return "?";
}

std::vector<double> map_features(const FeatureMap& map, double y, double lower, double upper) {
  const double span = upper - lower;
  const double t = (y - lower) / span;
  std::vector<double> x(map.dim);
  for (std::size_t j = 0; j < map.dim; ++j) {
    const auto jj = static_cast<double>(j);
    switch (map.kind) {
      case FeatureMap::Kind::Linear:
        x[j] = (y / span) * (static_cast<double>(map.dim) - jj) / static_cast<double>(map.dim);
        break;
      case FeatureMap::Kind::Trig:
        x[j] = std::sin((jj + 1.0) * std::numbers::pi / 2.0 * t + jj * std::numbers::pi / 3.0);
        break;
      case FeatureMap::Kind::Poly:
        x[j] = std::pow(2.0 * t - 1.0, jj + 1.0);
        break;
    }
  }
  return x;
}

void DatasetSpec::validate() const {
  if (n_train == 0 || n_test == 0) throw ContractError("dataset sizes must be positive");
  if (!(lower < upper)) throw ContractError("dataset label range needs lower < upper");
  if (!(noise_sigma >= 0.0)) throw ContractError("noise sigma must be non-negative");
  if (feature_map.dim == 0) throw ContractError("feature map dimension must be positive");
  profile.validate();
}

RegressionDataset RegressionDataset::subset(const std::vector<std::size_t>& indices) const {
  if (indices.empty()) throw ContractError("empty dataset subset");
  RegressionDataset out;
  out.split = split;
  out.lower = lower;
  out.upper = upper;
  const std::size_t d = dim();
  out.features = Tensor({indices.size(), d});
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    std::copy_n(features.data.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                out.features.data.begin() + static_cast<std::ptrdiff_t>(r * d));
    out.labels.push_back(labels[src]);
  }
  return out;
}

namespace {

double sample_unit(const DensityProfile& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  switch (p.kind) {
    case DensityProfile::Kind::Uniform:
      return uni(rng);
    case DensityProfile::Kind::Exponential: {
      const double u = uni(rng);
      return -std::log1p(-u * -std::expm1(-p.rate)) / p.rate;
    }
    case DensityProfile::Kind::ParetoTail: {
      const double u = uni(rng);
      const double x = std::pow(1.0 - u * (1.0 - std::pow(10.0, -p.alpha)), -1.0 / p.alpha);
      return std::clamp((x - 1.0) / 9.0, 0.0, 1.0);
    }
    case DensityProfile::Kind::TwoMode: {
      const int mode = uni(rng) < p.mix ? 0 : 1;
      std::normal_distribution<double> normal(p.centers[mode], p.widths[mode]);
      for (;;) {
        const double t = normal(rng);
        if (t >= 0.0 && t <= 1.0) return t;
      }
    }
  }
  return 0.0;
}

RegressionDataset make_split(const DatasetSpec& spec, const DensityProfile& profile, std::size_t n,
                             std::uint64_t label_seed, std::uint64_t noise_seed, std::string split) {
  RegressionDataset ds;
  ds.split = std::move(split);
  ds.lower = spec.lower;
  ds.upper = spec.upper;
  ds.labels = sample_labels(profile, spec.lower, spec.upper, n, label_seed);
  const std::size_t d = spec.feature_map.dim;
  ds.features = Tensor({n, d});
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = map_features(spec.feature_map, ds.labels[i], spec.lower, spec.upper);
    for (std::size_t j = 0; j < d; ++j) {
      ds.features.at(i, j) = spec.noise_sigma > 0.0 ? x[j] + spec.noise_sigma * noise(rng) : x[j];
    }
  }
  return ds;
}

}  // namespace

std::vector<double> sample_labels(const DensityProfile& profile, double lower, double upper, std::size_t n,
                                  std::uint64_t seed) {
  profile.validate();
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& y : out) y = std::clamp(lower + sample_unit(profile, rng) * (upper - lower), lower, upper);
  return out;
}

std::pair<RegressionDataset, RegressionDataset> generate(const DatasetSpec& spec) {
  spec.validate();
  const DensityProfile balanced{DensityProfile::Kind::Uniform};
  auto train = make_split(spec, spec.profile, spec.n_train, derive_seed(spec.seed, 11), derive_seed(spec.seed, 12),
                          "train");
  auto test = make_split(spec, balanced, spec.n_test, derive_seed(spec.seed, 13), derive_seed(spec.seed, 14), "test");
  return {std::move(train), std::move(test)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw IoError("non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " + std::to_string(col));
  }
  return value;
}

}  // namespace

RegressionDataset load_csv(const std::string& path, const std::string& label_column,
                           std::optional<std::pair<double, double>> label_range) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw IoError("'" + path + "' is empty");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw IoError("column '" + label_column + "' not found in '" + path + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t d = header.size() - 1;
  if (d == 0) throw ContractError("'" + path + "' has no feature columns besides '" + label_column + "'");

  std::vector<double> feats;
  std::vector<double> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IoError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row, c + 1);
      if (c == label_idx) {
        labels.push_back(v);
      } else {
        feats.push_back(v);
      }
    }
  }
  if (labels.empty()) throw IoError("'" + path + "' has a header but no data rows");

  RegressionDataset ds;
  ds.split = "csv";
  ds.features = Tensor({labels.size(), d}, std::move(feats));
  ds.labels = std::move(labels);
  if (label_range) {
    ds.lower = label_range->first;
    ds.upper = label_range->second;
  } else {
    const auto [lo, hi] = std::minmax_element(ds.labels.begin(), ds.labels.end());
    ds.lower = *lo;
    ds.upper = *hi;
  }
  return ds;
}

void save_csv(const RegressionDataset& data, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  const std::size_t d = data.dim();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << label_column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), data.features.at(i, j));
      out.write(buf, p - buf);
      out << ',';
    }
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), data.labels[i]);
    out.write(buf, p - buf);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace bsam
