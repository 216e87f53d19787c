#include "bsam/metrics.hpp"

#include <cmath>
#include <sstream>

#include "bsam/error.hpp"

namespace bsam {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("prediction and truth lengths differ: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()));
  }
  if (pred.empty()) throw ContractError("metric of an empty sample set");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::fabs(truth[i] - pred[i]);
  return acc / static_cast<double>(pred.size());
}

double gm(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::log(std::max(std::fabs(truth[i] - pred[i]), kGmEpsilon));
  return std::exp(acc / static_cast<double>(pred.size()));
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = truth[i] - pred[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double delta1(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0.0) || !(truth[i] > 0.0)) {
      throw ContractError("delta1 needs strictly positive values (sample " + std::to_string(i) + ")");
    }
    const double ratio = std::max(truth[i] / pred[i], pred[i] / truth[i]);
    if (ratio < kDelta1Threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double bmae(std::span<const double> pred, std::span<const double> truth, const LabelHistogram& hist) {
  check_pair(pred, truth);
  std::vector<double> sum(hist.bins(), 0.0);
  std::vector<std::size_t> count(hist.bins(), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto k = hist.bin_of(truth[i]);
    sum[k] += std::fabs(truth[i] - pred[i]);
    ++count[k];
  }
  double acc = 0.0;
  std::size_t nonempty = 0;
  for (std::size_t k = 0; k < hist.bins(); ++k) {
    if (count[k] == 0) continue;
    acc += sum[k] / static_cast<double>(count[k]);
    ++nonempty;
  }
  return acc / static_cast<double>(nonempty);
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Mae:
      return "mae";
    case Metric::Gm:
      return "gm";
    case Metric::Rmse:
      return "rmse";
    case Metric::Delta1:
      return "delta1";
    case Metric::Bmae:
      return "bmae";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  for (Metric m : {Metric::Mae, Metric::Gm, Metric::Rmse, Metric::Delta1, Metric::Bmae}) {
    if (to_string(m) == s) return m;
  }
  throw ContractError("unknown metric '" + s + "'");
}

std::vector<Metric> default_metrics() { return {Metric::Mae, Metric::Gm, Metric::Rmse, Metric::Bmae}; }

std::optional<double> MetricReport::get(Metric m) const {
  switch (m) {
    case Metric::Mae:
      return mae;
    case Metric::Gm:
      return gm;
    case Metric::Rmse:
      return rmse;
    case Metric::Delta1:
      return delta1;
    case Metric::Bmae:
      return bmae;
  }
  return std::nullopt;
}

MetricReport metric_report(std::span<const double> pred, std::span<const double> truth, const LabelHistogram& hist,
                           std::span<const Metric> metrics) {
  MetricReport r;
  r.n = pred.size();
  if (r.n == 0) return r;
  for (Metric m : metrics) {
    switch (m) {
      case Metric::Mae:
        r.mae = mae(pred, truth);
        break;
      case Metric::Gm:
        r.gm = gm(pred, truth);
        break;
      case Metric::Rmse:
        r.rmse = rmse(pred, truth);
        break;
      case Metric::Delta1:
        r.delta1 = delta1(pred, truth);
        break;
      case Metric::Bmae:
        r.bmae = bmae(pred, truth, hist);
        break;
    }
  }
  return r;
}

const MetricReport& RegionReport::region(Region r) const {
  switch (r) {
    case Region::Many:
      return many;
    case Region::Medium:
      return medium;
    case Region::Few:
      return few;
    case Region::Empty:
      break;
  }
  return all;
}

RegionReport region_report(std::span<const double> pred, std::span<const double> truth,
                           const LabelHistogram& train_hist, const RegionMap& regions,
                           std::span<const Metric> metrics) {
  if (regions.regions.size() != train_hist.bins()) throw ShapeError("region map does not match histogram bins");
  if (pred.size() != truth.size()) throw ShapeError("prediction and truth lengths differ");
  std::vector<double> p[3], t[3];
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Region r = regions.regions[train_hist.bin_of(truth[i])];
    if (r == Region::Empty) continue;
    const auto slot = static_cast<std::size_t>(r);
    p[slot].push_back(pred[i]);
    t[slot].push_back(truth[i]);
  }
  RegionReport out;
  out.all = metric_report(pred, truth, train_hist, metrics);
  out.many = metric_report(p[0], t[0], train_hist, metrics);
  out.medium = metric_report(p[1], t[1], train_hist, metrics);
  out.few = metric_report(p[2], t[2], train_hist, metrics);
  return out;
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"n", r.n}};
  for (Metric m : {Metric::Mae, Metric::Gm, Metric::Rmse, Metric::Delta1, Metric::Bmae}) {
    if (auto v = r.get(m)) j[to_string(m)] = *v;
  }
}

void to_json(nlohmann::json& j, const RegionReport& r) {
  j = nlohmann::json{{"all", r.all}, {"many", r.many}, {"medium", r.medium}, {"few", r.few}};
}

std::string region_report_csv(const RegionReport& r, std::span<const Metric> metrics) {
  std::ostringstream os;
  os.precision(17);
  os << "metric,all,many,medium,few\n";
  for (Metric m : metrics) {
    os << to_string(m);
    for (const MetricReport* rep : {&r.all, &r.many, &r.medium, &r.few}) {
      os << ',';
      if (auto v = rep->get(m)) os << *v;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace bsam
