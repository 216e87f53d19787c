#include "bsam/objective.hpp"

#include <algorithm>
#include <cmath>

namespace bsam {

LossObjective::LossObjective(const MlpModel& model, Tensor features, Tensor targets, LossKind kind,
                             std::vector<double> weights)
    : model_(&model),
      features_(std::move(features)),
      targets_(std::move(targets)),
      kind_(kind),
      weights_(std::move(weights)) {
  if (features_.shape.size() != 2 || features_.shape[1] != model.input_dim()) {
    throw ShapeError("features must have shape (B, " + std::to_string(model.input_dim()) + "), got " +
                     shape_string(features_.shape));
  }
  if (targets_.shape != Shape{features_.shape[0], 1}) {
    throw ShapeError("targets must have shape (" + std::to_string(features_.shape[0]) + ", 1), got " +
                     shape_string(targets_.shape));
  }
  if (!weights_.empty()) detail::check_loss_weights(weights_, features_.shape[0]);
}

namespace {

void check_finite(std::span<const double> xs, const char* what) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw NumericError(std::string("non-finite ") + what + " at coordinate " + std::to_string(i),
                         static_cast<std::ptrdiff_t>(i));
    }
  }
}

}  // namespace

std::vector<double> hvp(const Objective& objective, std::span<const double> theta, std::span<const double> v,
                        HvpMethod method) {
  const std::size_t n = objective.dim();
  if (v.size() != n || theta.size() != n) {
    throw ShapeError("hvp: vector length does not match objective dimension " + std::to_string(n));
  }
  std::vector<double> out(n, 0.0);
  if (method == HvpMethod::Exact) {
    objective.hessian_vector(theta, v, out);
    check_finite(out, "Hessian-vector product");
    return out;
  }

  double vnorm = 0.0;
  double theta_inf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vnorm += v[i] * v[i];
    theta_inf = std::max(theta_inf, std::fabs(theta[i]));
  }
  vnorm = std::sqrt(vnorm);
  if (vnorm == 0.0) return out;
  const double h = 1e-4 * (1.0 + theta_inf);

  std::vector<double> plus(theta.begin(), theta.end());
  std::vector<double> minus(theta.begin(), theta.end());
  for (std::size_t i = 0; i < n; ++i) {
    plus[i] += h * v[i] / vnorm;
    minus[i] -= h * v[i] / vnorm;
  }
  std::vector<double> g_plus(n), g_minus(n);
  objective.gradient(plus, g_plus);
  objective.gradient(minus, g_minus);
  check_finite(g_plus, "gradient");
  check_finite(g_minus, "gradient");
  for (std::size_t i = 0; i < n; ++i) out[i] = (g_plus[i] - g_minus[i]) * vnorm / (2.0 * h);
  check_finite(out, "Hessian-vector product");
  return out;
}

}  // namespace bsam
