#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the autodiff engine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using Fn = std::function<double(const std::vector<double>&)>;

// Central differences with a fixed step.
inline std::vector<double> fd_gradient(const Fn& f, std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double up = f(x);
    x[i] = xi - h;
    const double down = f(x);
    x[i] = xi;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

using FnLd = std::function<long double(const std::vector<double>&)>;

// Central differences over an extended-precision function, divided by the
// step actually taken after rounding theta +- h.
inline std::vector<double> fd_gradient_ld(const FnLd& f, std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double up_x = xi + h, down_x = xi - h;
    x[i] = up_x;
    const long double up = f(x);
    x[i] = down_x;
    const long double down = f(x);
    x[i] = xi;
    g[i] = static_cast<double>((up - down) / (static_cast<long double>(up_x) - static_cast<long double>(down_x)));
  }
  return g;
}

inline double max_rel_error(std::span<const double> got, std::span<const double> want, double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    worst = std::max(worst, std::abs(got[i] - want[i]) / (floor + std::abs(want[i])));
  }
  return worst;
}

using GradFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Dense Hessian from central differences of an analytic gradient,
// symmetrized. Row-major n x n.
inline std::vector<double> fd_hessian(const GradFn& grad, std::vector<double> x, double h = 1e-5) {
  const std::size_t n = x.size();
  std::vector<double> H(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = x[j];
    x[j] = xj + h;
    const auto up = grad(x);
    x[j] = xj - h;
    const auto down = grad(x);
    x[j] = xj;
    for (std::size_t i = 0; i < n; ++i) H[i * n + j] = (up[i] - down[i]) / (2.0 * h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (H[i * n + j] + H[j * n + i]);
      H[i * n + j] = H[j * n + i] = s;
    }
  }
  return H;
}

// Dense Hessian from second differences of the function alone.
inline std::vector<double> fd_hessian_values(const Fn& f, std::vector<double> x, double h = 1e-4) {
  const std::size_t n = x.size();
  std::vector<double> H(n * n);
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    H[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double xj = x[j];
      auto at = [&](double di, double dj) {
        x[i] = xi + di;
        x[j] = xj + dj;
        const double v = f(x);
        x[i] = xi;
        x[j] = xj;
        return v;
      };
      const double v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
      H[i * n + j] = H[j * n + i] = v;
    }
  }
  return H;
}

// Cyclic Jacobi rotations on a symmetric matrix; returns the eigenvalues.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> A, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += A[i * n + j] * A[i * n + j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A[k * n + p];
          const double akq = A[k * n + q];
          A[k * n + p] = c * akp - s * akq;
          A[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A[p * n + k];
          const double aqk = A[q * n + k];
          A[p * n + k] = c * apk - s * aqk;
          A[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = A[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double largest_magnitude(const std::vector<double>& ev) {
  double best = 0.0;
  for (double e : ev)
    if (std::abs(e) > std::abs(best)) best = e;
  return best;
}

inline double dense_trace(const std::vector<double>& H, std::size_t n) {
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += H[i * n + i];
  return t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> gaussian_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& e : v) e = d(rng);
  return v;
}

// Plain MLP forward pass written out with loops, tanh or relu hidden units
// and a linear head; weights laid out (in x out) per layer, then bias.
inline std::vector<double> mlp_forward(const std::vector<std::size_t>& widths, bool use_tanh,
                                       const std::vector<double>& theta, const std::vector<double>& x,
                                       std::size_t batch) {
  std::vector<double> h = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    std::vector<double> next(batch * out);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < out; ++j) {
        double s = theta[off + in * out + j];
        for (std::size_t i = 0; i < in; ++i) s += h[b * in + i] * theta[off + i * out + j];
        if (l + 2 < widths.size()) s = use_tanh ? std::tanh(s) : std::max(0.0, s);
        next[b * out + j] = s;
      }
    }
    off += in * out + out;
    h = std::move(next);
  }
  return h;
}

// Mean (optionally weighted) L1 or L2 loss of the same MLP, evaluated in
// long double.
inline long double mlp_loss_ld(const std::vector<std::size_t>& widths, bool use_tanh, const std::vector<double>& theta,
                               const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& weights, bool l1) {
  const std::size_t batch = y.size();
  std::vector<long double> h(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    std::vector<long double> next(batch * out);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < out; ++j) {
        long double s = theta[off + in * out + j];
        for (std::size_t i = 0; i < in; ++i) s += h[b * in + i] * static_cast<long double>(theta[off + i * out + j]);
        if (l + 2 < widths.size()) s = use_tanh ? std::tanh(s) : (s > 0 ? s : 0.0L);
        next[b * out + j] = s;
      }
    }
    off += in * out + out;
    h = std::move(next);
  }
  long double acc = 0.0L;
  for (std::size_t b = 0; b < batch; ++b) {
    const long double r = h[b] - y[b];
    const long double w = weights.empty() ? 1.0L : weights[b];
    acc += w * (l1 ? (r < 0 ? -r : r) : r * r);
  }
  return acc / static_cast<long double>(batch);
}

}  // namespace oracle
