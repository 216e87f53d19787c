#include "bsam/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bsam/random.hpp"

namespace bsam {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    for (auto& x : v) x = normal(rng);
    norm = std::sqrt(dot(v, v));
  } while (norm == 0.0);
  for (auto& x : v) x /= norm;
  return v;
}

constexpr double kVanishingNorm = 1e-30;

}  // namespace

PowerIterationResult lambda_max(const Objective& objective, std::span<const double> theta, std::size_t iters,
                                double tol, std::uint64_t seed, HvpMethod method) {
  if (iters == 0) throw ContractError("power iteration needs at least one iteration");
  std::mt19937_64 rng(seed);
  std::vector<double> v = random_unit(objective.dim(), rng);
  PowerIterationResult res;
  double previous = 0.0;
  std::size_t vanished = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    const std::vector<double> hv = hvp(objective, theta, v, method);
    res.iterations = it + 1;
    const double norm = std::sqrt(dot(hv, hv));
    if (norm < kVanishingNorm) {
      if (++vanished == 3) {
        res.lambda_max = 0.0;
        res.degenerate = true;
        return res;
      }
      v = random_unit(objective.dim(), rng);
      continue;
    }
    vanished = 0;
    const double rq = dot(v, hv);
    res.lambda_max = rq;
    if (it > 0 && std::fabs(rq - previous) < tol * std::max(1.0, std::fabs(rq))) {
      res.converged = true;
      return res;
    }
    previous = rq;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = hv[i] / norm;
  }
  return res;
}

std::vector<double> rademacher_probe(std::size_t dim, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(derive_seed(seed, index));
  std::vector<double> z(dim);
  for (auto& x : z) x = (rng() >> 63) ? 1.0 : -1.0;
  return z;
}

double TraceEstimate::standard_error() const {
  if (samples.size() < 2) return 0.0;
  double var = 0.0;
  for (double s : samples) var += (s - trace) * (s - trace);
  var /= static_cast<double>(samples.size() - 1);
  return std::sqrt(var / static_cast<double>(samples.size()));
}

TraceEstimate hessian_trace(const Objective& objective, std::span<const double> theta, std::size_t probes,
                            std::uint64_t seed, HvpMethod method) {
  if (probes == 0) throw ContractError("Hutchinson estimate needs at least one probe");
  TraceEstimate est;
  est.samples.reserve(probes);
  double acc = 0.0;
  for (std::size_t j = 0; j < probes; ++j) {
    const auto z = rademacher_probe(objective.dim(), seed, j);
    const double s = dot(z, hvp(objective, theta, z, method));
    est.samples.push_back(s);
    acc += s;
  }
  est.trace = acc / static_cast<double>(probes);
  return est;
}

std::vector<double> filter_normalized_direction(const ParamVector& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> d(params.size());
  for (auto& x : d) x = normal(rng);
  for (const auto& seg : params.segments()) {
    double dn = 0.0, tn = 0.0;
    for (std::size_t i = seg.offset; i < seg.offset + seg.size(); ++i) {
      dn += d[i] * d[i];
      tn += params.values[i] * params.values[i];
    }
    const double scale = dn > 0.0 ? std::sqrt(tn) / std::sqrt(dn) : 0.0;
    for (std::size_t i = seg.offset; i < seg.offset + seg.size(); ++i) d[i] *= scale;
  }
  return d;
}

LossSlice loss_slice(const MlpModel& model, const Tensor& features, std::span<const double> labels, LossKind loss,
                     std::uint64_t direction_seed, std::vector<double> offsets) {
  for (double t : offsets) {
    if (!std::isfinite(t)) throw ContractError("loss slice offsets must be finite");
  }
  std::sort(offsets.begin(), offsets.end());
  const LossObjective objective(model, features, Tensor({labels.size(), 1}, {labels.begin(), labels.end()}), loss);
  const auto d = filter_normalized_direction(model.params, direction_seed);
  const auto& theta = model.params.values;

  LossSlice slice;
  slice.direction_seed = direction_seed;
  slice.offsets = offsets;
  std::vector<double> shifted(theta.size());
  for (double t : offsets) {
    for (std::size_t i = 0; i < theta.size(); ++i) shifted[i] = theta[i] + t * d[i];
    slice.losses.push_back(objective.value(shifted));
  }
  return slice;
}

SharpnessReport sharpness(const MlpModel& model, const Tensor& features, std::span<const double> labels,
                          LossKind loss, const SharpnessOptions& options) {
  if (labels.empty()) throw ContractError("sharpness diagnostics need a non-empty sample subset");
  const LossObjective objective(model, features, Tensor({labels.size(), 1}, {labels.begin(), labels.end()}), loss);
  const auto& theta = model.params.values;
  const auto power = lambda_max(objective, theta, options.power_iters, options.tol,
                                derive_seed(options.seed, 0), options.method);
  const auto trace = hessian_trace(objective, theta, options.probes, derive_seed(options.seed, 1), options.method);
  SharpnessReport r;
  r.lambda_max = power.lambda_max;
  r.trace = trace.trace;
  r.probes = options.probes;
  r.power_iters = options.power_iters;
  r.iterations_used = power.iterations;
  r.degenerate = power.degenerate;
  r.subset = options.subset;
  r.seed = options.seed;
  r.samples = labels.size();
  return r;
}

void to_json(nlohmann::json& j, const SharpnessReport& r) {
  j = nlohmann::json{{"lambda_max", r.lambda_max}, {"trace", r.trace},
                     {"probes", r.probes},         {"power_iters", r.power_iters},
                     {"iterations_used", r.iterations_used}, {"degenerate", r.degenerate},
                     {"subset", r.subset},         {"seed", r.seed},
                     {"samples", r.samples}};
}

std::string loss_slice_csv(const LossSlice& slice) {
  std::ostringstream os;
  os.precision(17);
  os << "offset,loss\n";
  for (std::size_t i = 0; i < slice.offsets.size(); ++i) os << slice.offsets[i] << ',' << slice.losses[i] << '\n';
  return os.str();
}

}  // namespace bsam
