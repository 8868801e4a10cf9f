#pragma once

// Forward-mode dual number with a single derivative channel.  Used to push
// directional derivatives through the pointwise metric/Hodge pipeline and
// through entire field-level right-hand sides (Jacobian-vector products).
//
// Comparisons act on the value part only, so branch decisions (Cholesky
// pivots, positivity guards) follow the primal computation.

#include <cmath>

namespace g2flow {

struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // derivative along the seeded direction

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants lift implicitly
  Dual(double value, double deriv) : v(value), d(deriv) {}

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
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    v /= o.v;
    d = (d - v * o.d) / o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return Dual(-a.v, -a.d); }
inline Dual operator+(const Dual& a) { return a; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
inline bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }

inline Dual sqrt(const Dual& a) {
  double r = std::sqrt(a.v);
  return Dual(r, 0.5 * a.d / r);
}

// pow with a constant (non-dual) exponent; covers the (det B)^{-1/9} use.
inline Dual pow(const Dual& a, double e) {
  double p = std::pow(a.v, e);
  return Dual(p, e * p / a.v * a.d);
}

inline Dual fabs(const Dual& a) { return a.v < 0.0 ? -a : a; }

// Uniform accessors so templated kernels can report scalar diagnostics.
inline double scalar_value(double x) { return x; }
inline double scalar_value(const Dual& x) { return x.v; }
inline double scalar_deriv(double) { return 0.0; }
inline double scalar_deriv(const Dual& x) { return x.d; }

}  // namespace g2flow
