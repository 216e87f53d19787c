#pragma once

// Dense kernels behind the autodiff graph. Each kernel exists twice: a plain
// serial reference and an OpenMP version. The OpenMP versions only partition
// over output elements, so every output is accumulated in the same order as
// in the serial loop and the two agree bitwise.

#include <cmath>
#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bsam/dual.hpp"

namespace bsam::kernels {

// Work (in multiply-adds) below which the OpenMP kernels stay on one thread.
std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t work);

inline bool run_parallel(std::size_t work) {
#ifdef _OPENMP
  return work >= parallel_threshold() && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
  (void)work;
  return false;
#endif
}

namespace serial {

// c[n x k] = a[n x m] * b[m x k]
template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    T* crow = c + r * k;
    for (std::size_t j = 0; j < k; ++j) crow[j] = T(0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const T av = a[r * m + i];
      const T* brow = b + i * k;
      for (std::size_t j = 0; j < k; ++j) crow[j] += av * brow[j];
    }
  }
}

// da[n x m] += dy[n x k] * b[m x k]^T
template <class T>
void matmul_grad_lhs(const T* dy, const T* b, T* da, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      T acc(0.0);
      const T* brow = b + i * k;
      const T* dyrow = dy + r * k;
      for (std::size_t j = 0; j < k; ++j) acc += dyrow[j] * brow[j];
      da[r * m + i] += acc;
    }
  }
}

// db[m x k] += a[n x m]^T * dy[n x k]
template <class T>
void matmul_grad_rhs(const T* a, const T* dy, T* db, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    T* dbrow = db + i * k;
    for (std::size_t r = 0; r < n; ++r) {
      const T av = a[r * m + i];
      const T* dyrow = dy + r * k;
      for (std::size_t j = 0; j < k; ++j) dbrow[j] += av * dyrow[j];
    }
  }
}

// x[n x k] += bias[k] row-wise
template <class T>
void add_bias(T* x, const T* bias, std::size_t n, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < k; ++j) x[r * k + j] += bias[j];
}

// dbias[k] += column sums of dy[n x k]
template <class T>
void bias_grad(const T* dy, T* dbias, std::size_t n, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < k; ++j) dbias[j] += dy[r * k + j];
}

template <class T>
void tanh_forward(const T* x, T* y, std::size_t n) {
  using std::tanh;
  for (std::size_t i = 0; i < n; ++i) y[i] = tanh(x[i]);
}

// dx += dy * (1 - y^2)
template <class T>
void tanh_backward(const T* y, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * (T(1.0) - y[i] * y[i]);
}

template <class T>
void relu_forward(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = primal(x[i]) > 0.0 ? x[i] : T(0.0);
}

template <class T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (primal(x[i]) > 0.0) dx[i] += dy[i];
}

}  // namespace serial

namespace omp {

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k) {
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n * m * k))
  for (std::int64_t r = 0; r < rows; ++r) {
    T* crow = c + r * k;
    for (std::size_t j = 0; j < k; ++j) crow[j] = T(0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const T av = a[r * m + i];
      const T* brow = b + i * k;
      for (std::size_t j = 0; j < k; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
void matmul_grad_lhs(const T* dy, const T* b, T* da, std::size_t n, std::size_t m, std::size_t k) {
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n * m * k))
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      T acc(0.0);
      const T* brow = b + i * k;
      const T* dyrow = dy + r * k;
      for (std::size_t j = 0; j < k; ++j) acc += dyrow[j] * brow[j];
      da[r * m + i] += acc;
    }
  }
}

template <class T>
void matmul_grad_rhs(const T* a, const T* dy, T* db, std::size_t n, std::size_t m, std::size_t k) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (run_parallel(n * m * k))
  for (std::int64_t i = 0; i < rows; ++i) {
    T* dbrow = db + i * k;
    for (std::size_t r = 0; r < n; ++r) {
      const T av = a[r * m + i];
      const T* dyrow = dy + r * k;
      for (std::size_t j = 0; j < k; ++j) dbrow[j] += av * dyrow[j];
    }
  }
}

template <class T>
void add_bias(T* x, const T* bias, std::size_t n, std::size_t k) {
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n * k))
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < k; ++j) x[r * k + j] += bias[j];
}

template <class T>
void bias_grad(const T* dy, T* dbias, std::size_t n, std::size_t k) {
  const auto cols = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static) if (run_parallel(n * k))
  for (std::int64_t j = 0; j < cols; ++j)
    for (std::size_t r = 0; r < n; ++r) dbias[j] += dy[r * k + j];
}

template <class T>
void tanh_forward(const T* x, T* y, std::size_t n) {
  using std::tanh;
  const auto len = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(16 * n))
  for (std::int64_t i = 0; i < len; ++i) y[i] = tanh(x[i]);
}

template <class T>
void tanh_backward(const T* y, const T* dy, T* dx, std::size_t n) {
  const auto len = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n))
  for (std::int64_t i = 0; i < len; ++i) dx[i] += dy[i] * (T(1.0) - y[i] * y[i]);
}

template <class T>
void relu_forward(const T* x, T* y, std::size_t n) {
  const auto len = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n))
  for (std::int64_t i = 0; i < len; ++i) y[i] = primal(x[i]) > 0.0 ? x[i] : T(0.0);
}

template <class T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  const auto len = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (run_parallel(n))
  for (std::int64_t i = 0; i < len; ++i)
    if (primal(x[i]) > 0.0) dx[i] += dy[i];
}

}  // namespace omp

}  // namespace bsam::kernels
