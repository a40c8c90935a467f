#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "igflow/errors.hpp"

namespace igflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Rank-3 array indexed [k](i,j); which slot is "derivative direction" is
// documented per use site.
struct Ten3 {
  Ten3() = default;
  explicit Ten3(int n) : n(n), m(n, Mat::Zero(n, n)) {}
  int n = 0;
  std::vector<Mat> m;
  Mat& operator[](int k) { return m[k]; }
  const Mat& operator[](int k) const { return m[k]; }
  double max_abs() const {
    double r = 0;
    for (const auto& a : m) r = std::max(r, a.cwiseAbs().maxCoeff());
    return r;
  }
};

// Rank-4, indexed [k][l](i,j).
struct Ten4 {
  Ten4() = default;
  explicit Ten4(int n) : n(n), m(n, std::vector<Mat>(n, Mat::Zero(n, n))) {}
  int n = 0;
  std::vector<std::vector<Mat>> m;
  std::vector<Mat>& operator[](int k) { return m[k]; }
  const std::vector<Mat>& operator[](int k) const { return m[k]; }
};

// Coordinates tagged with the chart they live in. Cross-chart operations
// convert explicitly; nothing infers a chart from context.
struct Point {
  Vec x;
  std::string chart;

  int dim() const { return static_cast<int>(x.size()); }
};

inline Point make_point(std::initializer_list<double> coords, std::string chart) {
  Vec v(static_cast<int>(coords.size()));
  int i = 0;
  for (double c : coords) v[i++] = c;
  return Point{std::move(v), std::move(chart)};
}

// Axis-aligned box, optionally refined by a predicate for curved regions
// (e.g. eta2 > eta1^2). The predicate returns the offending coordinate
// index, or -1 when the point is admissible.
struct Domain {
  Vec lo, hi;
  std::function<int(const Vec&)> predicate;

  static Domain box(std::initializer_list<std::pair<double, double>> axes) {
    Domain d;
    d.lo.resize(static_cast<int>(axes.size()));
    d.hi.resize(static_cast<int>(axes.size()));
    int i = 0;
    for (auto [a, b] : axes) {
      d.lo[i] = a;
      d.hi[i] = b;
      ++i;
    }
    return d;
  }

  static Domain unbounded(int n) {
    Domain d;
    d.lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
    d.hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
    return d;
  }

  Domain with_predicate(std::function<int(const Vec&)> p) const {
    Domain d = *this;
    d.predicate = std::move(p);
    return d;
  }

  int dim() const { return static_cast<int>(lo.size()); }

  // Offending coordinate index, or -1 if x is admissible.
  int violation(const Vec& x) const {
    for (int i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i])) return i;
      if (x[i] < lo[i] || x[i] > hi[i]) return i;
    }
    if (predicate) return predicate(x);
    return -1;
  }

  bool contains(const Vec& x) const { return violation(x) == -1; }

  // Shrinks each finite axis by `frac` of its width at both ends. Used to
  // keep sweeps and grids away from degenerate loci.
  Domain shrunk(double frac) const {
    Domain d = *this;
    for (int i = 0; i < lo.size(); ++i) {
      if (std::isfinite(lo[i]) && std::isfinite(hi[i])) {
        double w = hi[i] - lo[i];
        d.lo[i] = lo[i] + frac * w;
        d.hi[i] = hi[i] - frac * w;
      }
    }
    return d;
  }
};

inline void require_in_domain(const Domain& dom, const Vec& x,
                              const std::string& who) {
  int bad = dom.violation(x);
  if (bad >= 0) {
    throw DomainError(who + ": coordinate " + std::to_string(bad) +
                          " outside the model domain",
                      bad);
  }
}

// Deterministic, implementation-independent generator (SplitMix64). The
// CLI's byte-identical-output guarantee rests on not using std::random
// distributions, whose streams vary across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace igflow
