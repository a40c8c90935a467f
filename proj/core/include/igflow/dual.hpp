#pragma once

#include <cmath>
#include <type_traits>

// Forward-mode scalar. Nesting Dual<Dual<...>> yields higher derivatives:
// a depth-k dual carries one mixed partial of order k in its fully-inner
// derivative slot.

namespace igflow {

template <typename T>
struct Dual {
  T v{};  // value
  T d{};  // tangent

  constexpr Dual() = default;
  constexpr Dual(const T& value, const T& tangent) : v(value), d(tangent) {}

  // Broadcast a plain number into the value slot at every nesting depth.
  template <typename S,
            typename = std::enable_if_t<std::is_arithmetic_v<S>>>
  constexpr Dual(S s) : v(static_cast<double>(s)), d() {}

  friend constexpr Dual operator+(const Dual& a) { return a; }
  friend constexpr Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) {
    return {a.v + b.v, a.d + b.d};
  }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) {
    return {a.v - b.v, a.d - b.d};
  }
  // (uv)' = u'v + uv'
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
  }
  // (u/v)' = (u' - (u/v) v')/v
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }

  Dual& operator+=(const Dual& b) { return *this = *this + b; }
  Dual& operator-=(const Dual& b) { return *this = *this - b; }
  Dual& operator*=(const Dual& b) { return *this = *this * b; }
  Dual& operator/=(const Dual& b) { return *this = *this / b; }

  // Ordering compares values only.
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend constexpr bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend constexpr bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

  friend Dual exp(const Dual& a) {
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
  }
  friend Dual log(const Dual& a) {
    using std::log;
    return {log(a.v), a.d / a.v};
  }
  friend Dual sqrt(const Dual& a) {
    using std::sqrt;
    T r = sqrt(a.v);
    return {r, a.d / (T(2.0) * r)};
  }
  // d(x^c) = c x^{c-1} dx, constant exponent
  friend Dual pow(const Dual& a, double c) {
    using std::pow;
    T pm1 = pow_impl(a.v, c - 1.0);
    return {pm1 * a.v, T(c) * pm1 * a.d};
  }
  friend Dual abs(const Dual& a) {
    return a.v < T(0.0) ? -a : a;
  }
  friend Dual sin(const Dual& a) {
    using std::cos;
    using std::sin;
    return {sin(a.v), cos(a.v) * a.d};
  }
  friend Dual cos(const Dual& a) {
    using std::cos;
    using std::sin;
    return {cos(a.v), -sin(a.v) * a.d};
  }

  static T pow_impl(const T& base, double e) {
    using std::pow;
    return pow(base, e);
  }
};

inline double value_of(double x) { return x; }
template <typename T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

}  // namespace igflow
