#pragma once

#include <cmath>

namespace bsam {

// First-order dual number: value plus one directional tangent. Running the
// reverse pass in Dual arithmetic with tangent v on the parameters yields
// the exact Hessian-vector product in the gradient's tangent part.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double value, double tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator*(const Dual& a, double s) { return {a.v * s, a.d * s}; }
inline Dual operator*(double s, const Dual& a) { return {s * a.v, s * a.d}; }
inline Dual operator/(const Dual& a, double s) { return {a.v / s, a.d / s}; }

inline Dual tanh(const Dual& a) {
  const double t = std::tanh(a.v);
  return {t, a.d * (1.0 - t * t)};
}

inline double primal(double x) { return x; }
inline double primal(const Dual& x) { return x.v; }

}  // namespace bsam
