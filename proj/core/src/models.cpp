#include "igflow/models.hpp"

#include <cmath>

namespace igflow {

void ScalarFunc::derivatives2(double x, double& f, double& fp,
                              double& fpp) const {
  D2 r = (*this)(D2{D1{x, 1.0}, D1{1.0, 0.0}});
  f = r.v.v;
  fp = r.v.d;
  fpp = r.d.d;
}

namespace {

template <typename T>
T sq(const T& x) {
  return x * x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic
// ---------------------------------------------------------------------------

DuallyFlatModel quadratic_model(int n) {
  DuallyFlatModel m;
  m.name = "quadratic";
  m.dim = n;

  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));

  auto half_sq = [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    T s = T(0.0);
    for (const auto& xi : x) s += xi * xi;
    return T(0.5) * s;
  };
  m.psi = PotentialModel("quadratic.psi", Domain::unbounded(n), names, "theta",
                         half_sq);
  m.psi_star = PotentialModel("quadratic.psi_star", Domain::unbounded(n), names,
                              "eta", half_sq);
  auto identity = [](const auto& x) { return x; };
  m.eta_of_theta = VectorMap("identity", n, n, identity);
  m.theta_of_eta = VectorMap("identity", n, n, identity);

  m.display_chart = "theta";
  m.display_names = names;
  Domain box;
  box.lo = Vec::Constant(n, -2.0);
  box.hi = Vec::Constant(n, 2.0);
  m.sample_box = box;
  return m;
}

// ---------------------------------------------------------------------------
// Gaussian
// ---------------------------------------------------------------------------

namespace {

int gaussian_eta_violation(const Vec& eta) {
  return eta[1] - eta[0] * eta[0] > 0 ? -1 : 1;
}

int gaussian_theta_violation(const Vec& theta) { return theta[1] < 0 ? -1 : 1; }

}  // namespace

Mat GaussianModel::metric_upper(double mu, double sigma) {
  double s4 = sigma * sigma * sigma * sigma;
  Mat g(2, 2);
  g << 2 * mu * mu + sigma * sigma, -mu, -mu, 0.5;
  return g / s4;
}

Mat GaussianModel::metric_lower(double mu, double sigma) {
  double s2 = sigma * sigma;
  Mat g(2, 2);
  g << 1, 2 * mu, 2 * mu, 2 * (s2 + 2 * mu * mu);
  return s2 * g;
}

Mat GaussianModel::metric_lower_deriv(double mu, double sigma, int k) {
  double e1 = mu, e2 = mu * mu + sigma * sigma;
  Mat d(2, 2);
  if (k == 0) {
    d << -2 * e1, 2 * e2 - 6 * e1 * e1, 2 * e2 - 6 * e1 * e1,
        -8 * e1 * e1 * e1;
  } else {
    d << 1, 2 * e1, 2 * e1, 4 * e2;
  }
  return d;
}

GaussianModel gaussian_model() {
  GaussianModel gm;
  DuallyFlatModel& m = gm.model;
  m.name = "gaussian";
  m.dim = 2;

  Domain eta_dom = Domain::unbounded(2).with_predicate(gaussian_eta_violation);
  Domain theta_dom =
      Domain::unbounded(2).with_predicate(gaussian_theta_violation);

  m.psi_star = PotentialModel(
      "gaussian.psi_star", eta_dom, {"eta1", "eta2"}, "eta",
      [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        T s2 = x[1] - x[0] * x[0];
        return T(-0.5) * log(s2);
      });
  m.psi = PotentialModel(
      "gaussian.psi", theta_dom, {"theta1", "theta2"}, "theta",
      [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        // conjugate of -log(sigma)/... : theta2 < 0
        return -x[0] * x[0] / (T(4.0) * x[1]) - T(0.5) -
               T(0.5) * log(T(-2.0) * x[1]);
      });
  m.eta_of_theta = VectorMap("gaussian.eta(theta)", 2, 2, [](const auto& t) {
    using T = std::decay_t<decltype(t[0])>;
    T s2 = T(-0.5) / t[1];
    T mu = t[0] * s2;
    return std::vector<T>{mu, mu * mu + s2};
  });
  m.theta_of_eta = VectorMap("gaussian.theta(eta)", 2, 2, [](const auto& e) {
    using T = std::decay_t<decltype(e[0])>;
    T s2 = e[1] - e[0] * e[0];
    return std::vector<T>{e[0] / s2, T(-0.5) / s2};
  });

  m.display_chart = "(mu,sigma)";
  m.display_names = {"mu", "sigma"};
  m.display_to_eta = [](const Vec& d) {
    Vec e(2);
    e << d[0], d[0] * d[0] + d[1] * d[1];
    return e;
  };
  m.eta_to_display = [](const Vec& e) {
    Vec d(2);
    d << e[0], std::sqrt(e[1] - e[0] * e[0]);
    return d;
  };
  m.sample_box = Domain::box({{-2, 2}, {0.2, 3}});

  gm.sigma_gauge = GaugeField{
      "sigma_inverse", Chart::Eta,
      VectorMap("gaussian.A_star", 2, 2, [](const auto& e) {
        using T = std::decay_t<decltype(e[0])>;
        T s2 = e[1] - e[0] * e[0];
        return std::vector<T>{T(1.0) / sqrt(s2), T(0.0)};
      })};

  gm.riemannian = MetricField::closed_form(
      "gaussian.riemannian",
      Domain::box({{-1e9, 1e9}, {1e-9, 1e9}}), [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        T inv = T(1.0) / (x[1] * x[1]);
        return std::vector<T>{inv, T(0.0), T(0.0), T(2.0) * inv};
      });
  return gm;
}

// ---------------------------------------------------------------------------
// Flat potential family
// ---------------------------------------------------------------------------

PotentialModel flat_family_potential(const FlatFamilySpec& spec) {
  double a = spec.a, b = spec.b;
  ScalarFunc f = spec.f;
  return PotentialModel(
      spec.name + ".psi", spec.xy_domain, {"x", "y"}, "(x,y)",
      [a, b, f](const auto& xy) {
        using T = std::decay_t<decltype(xy[0])>;
        T sigma = pow(xy[0], b) * xy[1];
        return pow(xy[0], a) * f(sigma);
      });
}

Mat flat_family_metric(const FlatFamilySpec& spec, const Point& x,
                       FamilyForm form) {
  const double a = spec.a, b = spec.b;
  Mat g(2, 2);
  switch (form) {
    case FamilyForm::General: {
      if (!(x.x[0] > 0)) {
        throw DomainError(spec.name + ": x must be positive", 0);
      }
      double xx = x.x[0], yy = x.x[1];
      double sigma = std::pow(xx, b) * yy;
      double f, fp, fpp;
      spec.f.derivatives2(sigma, f, fp, fpp);
      double gxx = std::pow(xx, a - 2) *
                   (a * (a - 1) * f + b * (2 * a + b - 1) * sigma * fp +
                    b * b * sigma * sigma * fpp);
      double gxy = std::pow(xx, a + b - 1) * ((a + b) * fp + b * sigma * fpp);
      double gyy = std::pow(xx, a + 2 * b) * fpp;
      g << gxx, gxy, gxy, gyy;
      return g;
    }
    case FamilyForm::Weinhold: {
      if (std::abs(b + a) > 1e-12) {
        throw InvalidArgument(spec.name +
                              ": the (x,sigma) form requires b = -a");
      }
      if (!(x.x[0] > 0)) {
        throw DomainError(spec.name + ": x must be positive", 0);
      }
      double xx = x.x[0], sigma = x.x[1];
      double f, fp, fpp;
      spec.f.derivatives2(sigma, f, fp, fpp);
      g << std::pow(xx, a - 2) * a * (a - 1) * (f - sigma * fp), 0, 0,
          std::pow(xx, a) * fpp;
      return g;
    }
    case FamilyForm::Ruppeiner: {
      if (std::abs(b + 1) > 1e-12) {
        throw InvalidArgument(spec.name +
                              ": the (psi,sigma) form requires b = -1");
      }
      double psi = x.x[0], sigma = x.x[1];
      if (!(psi > 0)) {
        throw DomainError(spec.name + ": psi must be positive", 0);
      }
      double f, fp, fpp;
      spec.f.derivatives2(sigma, f, fp, fpp);
      g << (a - 1) / (a * psi), 0, 0,
          psi * (fpp / f - (a - 1) / a * sq(fp / f));
      return g;
    }
  }
  throw InvalidArgument("flat_family_metric: unknown form");
}

namespace {

// Profile value and first two derivatives at a scalar of any dual depth,
// obtained by pushing two extra dual levels through the erased function.
template <typename T>
struct ProfileJet {
  T f, fp, fpp;
};

template <typename T>
ProfileJet<T> family_profile(const ScalarFunc& f, const T& s) {
  using DT = Dual<Dual<T>>;
  DT r = f(DT{Dual<T>{s, T(1.0)}, Dual<T>{T(1.0), T(0.0)}});
  return {r.v.v, r.v.d, r.d.d};
}

}  // namespace

MetricField flat_family_metric_field(const FlatFamilySpec& spec,
                                     FamilyForm form, Domain box) {
  const double a = spec.a, b = spec.b;
  ScalarFunc f = spec.f;
  switch (form) {
    case FamilyForm::General:
      return MetricField::closed_form(
          spec.name + ".general", std::move(box), [a, b, f](const auto& p) {
            using T = std::decay_t<decltype(p[0])>;
            const T& x = p[0];
            T sigma = pow(x, b) * p[1];
            ProfileJet<T> pj = family_profile(f, sigma);
            T gxx = pow(x, a - 2) *
                    (T(a * (a - 1)) * pj.f +
                     T(b * (2 * a + b - 1)) * sigma * pj.fp +
                     T(b * b) * sigma * sigma * pj.fpp);
            T gxy = pow(x, a + b - 1) *
                    (T(a + b) * pj.fp + T(b) * sigma * pj.fpp);
            T gyy = pow(x, a + 2 * b) * pj.fpp;
            return std::vector<T>{gxx, gxy, gxy, gyy};
          });
    case FamilyForm::Weinhold:
      if (std::abs(b + a) > 1e-12) {
        throw InvalidArgument(spec.name +
                              ": the (x,sigma) form requires b = -a");
      }
      return MetricField::closed_form(
          spec.name + ".weinhold", std::move(box), [a, f](const auto& p) {
            using T = std::decay_t<decltype(p[0])>;
            const T& x = p[0];
            const T& sigma = p[1];
            ProfileJet<T> pj = family_profile(f, sigma);
            T zero(0.0);
            return std::vector<T>{
                pow(x, a - 2) * T(a * (a - 1)) * (pj.f - sigma * pj.fp), zero,
                zero, pow(x, a) * pj.fpp};
          });
    case FamilyForm::Ruppeiner:
      if (std::abs(b + 1) > 1e-12) {
        throw InvalidArgument(spec.name +
                              ": the (psi,sigma) form requires b = -1");
      }
      return MetricField::closed_form(
          spec.name + ".ruppeiner", std::move(box), [a, f](const auto& p) {
            using T = std::decay_t<decltype(p[0])>;
            const T& psi = p[0];
            const T& sigma = p[1];
            ProfileJet<T> pj = family_profile(f, sigma);
            T zero(0.0);
            T ratio = pj.fp / pj.f;
            return std::vector<T>{
                T((a - 1) / a) / psi, zero, zero,
                psi * (pj.fpp / pj.f - T((a - 1) / a) * ratio * ratio)};
          });
  }
  throw InvalidArgument("flat_family_metric_field: unknown form");
}

Vec flat_family_dual_vars(const FlatFamilySpec& spec, const Vec& xy) {
  if (!(xy[0] > 0)) {
    throw DomainError(spec.name + ": x must be positive", 0);
  }
  double sigma = std::pow(xy[0], spec.b) * xy[1];
  double f, fp, fpp;
  spec.f.derivatives2(sigma, f, fp, fpp);
  Vec th(2);
  th[0] = std::pow(xy[0], spec.a - 1) * (spec.a * f + spec.b * sigma * fp);
  th[1] = std::pow(xy[0], spec.a + spec.b) * fp;
  return th;
}

Vec pushforward_dual_vars(const Mat& jacobian, const Vec& theta) {
  if (jacobian.rows() != jacobian.cols() ||
      jacobian.rows() != theta.size()) {
    throw InvalidArgument("pushforward_dual_vars: dimension mismatch");
  }
  if (!jacobian.allFinite() || !theta.allFinite()) {
    throw InvalidArgument("pushforward_dual_vars: non-finite input");
  }
  return jacobian.transpose() * theta;
}

// ---------------------------------------------------------------------------
// Kerr
// ---------------------------------------------------------------------------

namespace {

constexpr double kExtremalCap = 0.95;   // |sigma|, |u| domain bound
constexpr double kInnerSigmaMin = 0.2;  // inner branch keeps S away from 0

template <typename T>
std::vector<T> kerr_theta_from_display(const std::vector<T>& ms, double br) {
  const T& M = ms[0];
  const T& sigma = ms[1];
  T w = sqrt(T(1.0) - sigma * sigma);
  return {T(4.0) * M * (T(1.0) + T(br) / w), T(-2.0 * br) * sigma / w};
}

template <typename T>
std::vector<T> kerr_eta_from_theta(const std::vector<T>& th, double br) {
  const T& q = th[1];
  T root = sqrt(T(4.0) + q * q);
  T sigma = T(-br) * q / root;
  T w = T(2.0) / root;
  T M = th[0] / (T(4.0) * (T(1.0) + T(br) / w));
  return {M, sigma * M * M};
}

template <typename T>
T kerr_entropy_t(const std::vector<T>& mj, double br) {
  const T& M = mj[0];
  T sigma = mj[1] / (M * M);
  return T(2.0) * M * M * (T(1.0) + T(br) * sqrt(T(1.0) - sigma * sigma));
}

}  // namespace

double KerrModel::mass(double S, double J) const {
  return 0.5 * std::sqrt(S + 4 * J * J / S);
}

double KerrModel::entropy(double M, double J) const {
  return kerr_entropy_t(std::vector<double>{M, J},
                        branch == KerrBranch::Outer ? 1.0 : -1.0);
}

Mat KerrModel::variable_map_jacobian(double M, double sigma) const {
  Mat j(2, 2);
  j << 1, 0, 2 * M * sigma, M * M;
  return j;
}

KerrModel kerr_model(KerrBranch branch) {
  const double br = branch == KerrBranch::Outer ? 1.0 : -1.0;
  const bool outer = branch == KerrBranch::Outer;

  KerrModel km;
  km.branch = branch;
  DuallyFlatModel& m = km.model;
  m.name = outer ? "kerr-outer" : "kerr-inner";
  m.dim = 2;

  auto eta_violation = [outer](const Vec& e) {
    if (!(e[0] > 0)) return 0;
    double sigma = e[1] / (e[0] * e[0]);
    if (std::abs(sigma) > kExtremalCap) return 1;
    if (!outer && std::abs(sigma) < kInnerSigmaMin) return 1;
    return -1;
  };
  Domain eta_dom = Domain::unbounded(2).with_predicate(eta_violation);

  auto theta_violation = [br, eta_violation](const Vec& th) {
    if (!(br * th[0] > 0)) return 0;  // sign of theta^M fixes the branch
    std::vector<double> e = kerr_eta_from_theta(
        std::vector<double>{th[0], th[1]}, br);
    Vec ev(2);
    ev << e[0], e[1];
    return eta_violation(ev);
  };
  Domain theta_dom = Domain::unbounded(2).with_predicate(theta_violation);

  m.psi_star = PotentialModel("kerr.entropy", eta_dom, {"M", "J"}, "eta",
                              [br](const auto& mj) {
                                return kerr_entropy_t(mj, br);
                              });
  m.psi = PotentialModel(
      "kerr.psi", theta_dom, {"theta1", "theta2"}, "theta",
      [br](const auto& th) {
        using T = std::decay_t<decltype(th[0])>;
        std::vector<T> e = kerr_eta_from_theta(th, br);
        return th[0] * e[0] + th[1] * e[1] - kerr_entropy_t(e, br);
      });
  m.eta_of_theta = VectorMap("kerr.eta(theta)", 2, 2, [br](const auto& th) {
    return kerr_eta_from_theta(th, br);
  });

  m.display_chart = "(M,sigma)";
  m.display_names = {"M", "sigma"};
  m.display_to_eta = [](const Vec& d) {
    Vec e(2);
    e << d[0], d[1] * d[0] * d[0];
    return e;
  };
  m.eta_to_display = [](const Vec& e) {
    Vec d(2);
    d << e[0], e[1] / (e[0] * e[0]);
    return d;
  };
  m.sample_box = outer ? Domain::box({{0.5, 2}, {-0.8, 0.8}})
                       : Domain::box({{0.5, 2}, {kInnerSigmaMin + 0.1, 0.85}});

  km.weinhold = MetricField::closed_form(
      m.name + ".weinhold",
      Domain::box({{1e-6, 1e9}, {-kExtremalCap, kExtremalCap}}),
      [br](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T& M = x[0];
        const T& sigma = x[1];
        T w = sqrt(T(1.0) - sigma * sigma);
        T zero(0.0);
        return std::vector<T>{T(4.0) * (T(1.0) + T(br) / w), zero, zero,
                              T(-2.0 * br) * M * M / (w * w * w)};
      });

  auto mass_violation = [](const Vec& sj) {
    if (!(sj[0] > 0)) return 0;
    double sig = 4 * sj[1] * sj[0] / (sj[0] * sj[0] + 4 * sj[1] * sj[1]);
    return std::abs(sig) <= kExtremalCap ? -1 : 1;
  };
  PotentialModel mass_potential(
      "kerr.mass", Domain::unbounded(2).with_predicate(mass_violation),
      {"S", "J"}, "(S,J)", [](const auto& sj) {
        using T = std::decay_t<decltype(sj[0])>;
        return T(0.5) * sqrt(sj[0] + T(4.0) * sj[1] * sj[1] / sj[0]);
      });
  km.mass_weinhold = MetricField::hessian_of(mass_potential);

  km.theta_of_display =
      VectorMap(m.name + ".theta(M,sigma)", 2, 2, [br](const auto& ms) {
        return kerr_theta_from_display(ms, br);
      });
  return km;
}

// ---------------------------------------------------------------------------
// Reissner-Nordstrom
// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> rn_theta_from_eta(const std::vector<T>& mq) {
  const T& M = mq[0];
  const T& Q = mq[1];
  T r = sqrt(M * M - Q * Q);
  T s = M + r;  // sqrt(S)
  return {T(2.0) * s * s / r, T(-2.0) * Q * s / r};
}

template <typename T>
T rn_entropy_t(const std::vector<T>& mq) {
  T r = sqrt(mq[0] * mq[0] - mq[1] * mq[1]);
  return sq(mq[0] + r);
}

}  // namespace

double RnModel::entropy(double M, double Q) const {
  return rn_entropy_t(std::vector<double>{M, Q});
}

double RnModel::mass(double S, double u) const {
  return 0.5 * std::sqrt(S) * (1 + u * u);
}

double RnModel::temperature(double S, double u) const {
  return (1 - u * u) / (4 * std::sqrt(S));
}

Mat RnModel::variable_map_jacobian(double S, double u) const {
  double rs = std::sqrt(S);
  Mat j(2, 2);
  j << (1 + u * u) / (2 * rs), u * rs, u / (2 * rs), rs;
  return j;
}

Vec RnModel::pushed_dual_vars(double S, double u) const {
  Vec d(2);
  d << S, u;
  return pushforward_dual_vars(variable_map_jacobian(S, u),
                               theta_of_display.eval(d));
}

RnModel rn_model() {
  RnModel rn;
  DuallyFlatModel& m = rn.model;
  m.name = "rn";
  m.dim = 2;

  auto eta_violation = [](const Vec& mq) {
    if (!(mq[0] > 0)) return 0;
    double r2 = mq[0] * mq[0] - mq[1] * mq[1];
    if (!(r2 > 0)) return 1;
    double u = mq[1] / (mq[0] + std::sqrt(r2));
    return std::abs(u) <= kExtremalCap ? -1 : 1;
  };
  Domain eta_dom = Domain::unbounded(2).with_predicate(eta_violation);

  auto theta_violation = [eta_violation](const Vec& th) {
    if (!(th[0] > 0)) return 0;
    double u = -th[1] / th[0];
    if (std::abs(u) >= 1) return 1;
    double rs = th[0] * (1 - u * u) / 4;
    if (!(rs > 0)) return 0;
    Vec mq(2);
    mq << rs * (1 + u * u) / 2, u * rs;
    return eta_violation(mq);
  };
  Domain theta_dom = Domain::unbounded(2).with_predicate(theta_violation);

  m.psi_star = PotentialModel("rn.entropy", eta_dom, {"M", "Q"}, "eta",
                              [](const auto& mq) { return rn_entropy_t(mq); });
  m.psi = PotentialModel(
      "rn.psi", theta_dom, {"theta1", "theta2"}, "theta", [](const auto& th) {
        using T = std::decay_t<decltype(th[0])>;
        T u = -th[1] / th[0];
        T rs = th[0] * (T(1.0) - u * u) / T(4.0);
        std::vector<T> mq{rs * (T(1.0) + u * u) / T(2.0), u * rs};
        return th[0] * mq[0] + th[1] * mq[1] - rn_entropy_t(mq);
      });
  m.eta_of_theta = VectorMap("rn.eta(theta)", 2, 2, [](const auto& th) {
    using T = std::decay_t<decltype(th[0])>;
    T u = -th[1] / th[0];
    T rs = th[0] * (T(1.0) - u * u) / T(4.0);
    return std::vector<T>{rs * (T(1.0) + u * u) / T(2.0), u * rs};
  });

  m.display_chart = "(S,u)";
  m.display_names = {"S", "u"};
  m.display_to_eta = [](const Vec& d) {
    double rs = std::sqrt(d[0]);
    Vec e(2);
    e << 0.5 * rs * (1 + d[1] * d[1]), d[1] * rs;
    return e;
  };
  m.eta_to_display = [](const Vec& e) {
    double rs = e[0] + std::sqrt(e[0] * e[0] - e[1] * e[1]);
    Vec d(2);
    d << rs * rs, e[1] / rs;
    return d;
  };
  m.sample_box = Domain::box({{0.5, 2}, {-0.8, 0.8}});

  Domain su_dom = Domain::box({{1e-6, 1e9}, {-kExtremalCap, kExtremalCap}});
  rn.weinhold =
      MetricField::closed_form("rn.weinhold", su_dom, [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T& S = x[0];
        const T& u = x[1];
        T zero(0.0);
        return std::vector<T>{
            -(T(1.0) - u * u) / (T(8.0) * S * sqrt(S)), zero, zero, sqrt(S)};
      });
  rn.ruppeiner =
      MetricField::closed_form("rn.ruppeiner", su_dom, [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T& S = x[0];
        const T& u = x[1];
        T zero(0.0);
        return std::vector<T>{T(-0.5) / S, zero, zero,
                              T(4.0) * S / (T(1.0) - u * u)};
      });

  rn.theta_of_display = VectorMap("rn.theta(S,u)", 2, 2, [](const auto& su) {
    using T = std::decay_t<decltype(su[0])>;
    T rs = sqrt(su[0]);
    T denom = T(1.0) - su[1] * su[1];
    return std::vector<T>{T(4.0) * rs / denom, T(-4.0) * su[1] * rs / denom};
  });
  return rn;
}

// ---------------------------------------------------------------------------
// Exponential-decay solves
// ---------------------------------------------------------------------------

namespace {

// Damped Newton for theta_map(x) = target in display coordinates.
Vec solve_decay_state(const VectorMap& theta_map, const Domain& dom,
                      const Vec& target, const Vec& guess,
                      double* residual_out) {
  Vec x = guess;
  Vec r = theta_map.eval(x) - target;
  for (int it = 0; it < 100; ++it) {
    if (r.norm() <= 1e-12) break;
    Mat j = theta_map.jacobian(x);
    Eigen::FullPivLU<Mat> lu(j);
    if (!lu.isInvertible()) {
      throw NewtonError(theta_map.name() + ": singular Jacobian", r.norm());
    }
    Vec step = lu.solve(-r);
    double alpha = 1.0;
    bool ok = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec cand = x + alpha * step;
      if (dom.contains(cand)) {
        Vec rc = theta_map.eval(cand) - target;
        if (rc.squaredNorm() <= r.squaredNorm() * (1 - 1e-4 * alpha)) {
          x = cand;
          r = rc;
          ok = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!ok) {
      throw NewtonError(theta_map.name() + ": line search stalled", r.norm());
    }
  }
  if (r.norm() > 1e-9) {
    throw NewtonError(theta_map.name() + ": decay solve did not converge",
                      r.norm());
  }
  if (residual_out) *residual_out = r.norm();
  return x;
}

DecayReport run_decay(const VectorMap& theta_map, const Domain& display_dom,
                      const Vec& x0, double t_end, int samples) {
  DecayReport rep;
  Vec theta0 = theta_map.eval(x0);
  Vec guess = x0;
  for (int k = 0; k < samples; ++k) {
    double t = t_end * k / (samples - 1);
    Vec target = theta0 * std::exp(-t);
    DecaySample s;
    s.t = t;
    try {
      s.display = solve_decay_state(theta_map, display_dom, target, guess,
                                    &s.residual);
    } catch (const NewtonError&) {
      rep.domain_exit = true;
      rep.exit_time = t;
      break;
    }
    s.theta = theta_map.eval(s.display);
    rep.max_residual = std::max(rep.max_residual, s.residual);
    guess = s.display;
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

}  // namespace

DecayReport decay_solution_check(const KerrModel& kerr, const Point& x0,
                                 double t_end, int samples) {
  Domain dom = Domain::box({{1e-9, 1e9}, {-kExtremalCap, kExtremalCap}});
  require_in_domain(dom, x0.x, "decay_solution_check");
  DecayReport rep =
      run_decay(kerr.theta_of_display, dom, x0.x, t_end, samples);

  // The printed closed-form (sigma(t), M(t)), evaluated for comparison: its
  // sigma lies in (1, 2] and cannot describe a sub-extremal state.
  Vec theta0 = kerr.theta_of_display.eval(x0.x);
  double A = theta0[0], B = theta0[1];
  double e2 = std::exp(-2 * t_end);
  double sigma_ref = 1 + 1 / (1 + 0.25 * B * B * e2);
  double m_ref = A * e2 / (4 * std::sqrt(1 + 0.25 * B * B * e2));
  Vec ref(2);
  ref << m_ref, sigma_ref;
  rep.reference_formula_end = ref;
  return rep;
}

DecayReport decay_solution_check(const RnModel& rn, const Point& x0,
                                 double t_end, int samples) {
  Domain dom = Domain::box({{1e-9, 1e9}, {-kExtremalCap, kExtremalCap}});
  require_in_domain(dom, x0.x, "decay_solution_check");
  DecayReport rep = run_decay(rn.theta_of_display, dom, x0.x, t_end, samples);

  Vec theta0 = rn.theta_of_display.eval(x0.x);
  double C = theta0[0], D = theta0[1];
  double s_scale = sq((C * C - D * D) / (4 * C));
  for (const auto& s : rep.samples) {
    rep.max_u_drift =
        std::max(rep.max_u_drift, std::abs(s.display[1] - x0.x[1]));
    double s_cf = s_scale * std::exp(-2 * s.t);
    rep.closed_form_dev =
        std::max(rep.closed_form_dev, std::abs(s.display[0] - s_cf));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Registries
// ---------------------------------------------------------------------------

namespace {

std::function<Vec(SplitMix64&)> box_sampler(const DuallyFlatModel& m,
                                            bool to_eta) {
  return [m, to_eta](SplitMix64& rng) {
    Vec d = m.sample_display(rng);
    return to_eta ? m.to_eta(d) : d;
  };
}

}  // namespace

std::vector<NamedPotential> builtin_potentials() {
  std::vector<NamedPotential> out;

  {
    DuallyFlatModel q = quadratic_model(2);
    out.push_back({"quadratic.psi", *q.psi, box_sampler(q, false)});
  }
  {
    GaussianModel g = gaussian_model();
    DuallyFlatModel m = g.model;
    // differentiation sweeps stay off the small-sigma corner, where the
    // log-potential's higher derivatives blow up faster than the FD oracle
    // can follow
    m.sample_box = Domain::box({{-2, 2}, {0.4, 3}});
    out.push_back({"gaussian.psi_star", *m.psi_star, box_sampler(m, true)});
    auto sample_theta = [m](SplitMix64& rng) {
      Vec d = m.sample_display(rng);
      return theta_from_eta(m, Point{m.to_eta(d), "eta"}).x;
    };
    out.push_back({"gaussian.psi", *m.psi, sample_theta});
  }
  {
    KerrModel k = kerr_model(KerrBranch::Outer);
    out.push_back(
        {"kerr.entropy", *k.model.psi_star, box_sampler(k.model, true)});

    PotentialModel mass(
        "kerr.mass",
        Domain::box({{0.3, 3}, {-0.5, 0.5}}).with_predicate([](const Vec& sj) {
          double sig =
              4 * sj[1] * sj[0] / (sj[0] * sj[0] + 4 * sj[1] * sj[1]);
          return std::abs(sig) <= 0.85 ? -1 : 1;
        }),
        {"S", "J"}, "(S,J)", [](const auto& sj) {
          using T = std::decay_t<decltype(sj[0])>;
          return T(0.5) * sqrt(sj[0] + T(4.0) * sj[1] * sj[1] / sj[0]);
        });
    Domain sample = Domain::box({{0.5, 2}, {-0.15, 0.15}});
    out.push_back({"kerr.mass", mass, [mass, sample](SplitMix64& rng) {
                     for (;;) {
                       Vec p(2);
                       p << rng.uniform(sample.lo[0], sample.hi[0]),
                           rng.uniform(sample.lo[1], sample.hi[1]);
                       if (mass.domain().contains(p)) return p;
                     }
                   }});
  }
  {
    RnModel r = rn_model();
    out.push_back({"rn.entropy", *r.model.psi_star, box_sampler(r.model, true)});
  }
  {
    FlatFamilySpec fam;
    fam.a = 2;
    fam.b = -1;
    fam.f = ScalarFunc("rn-profile", [](const auto& s) {
      using T = std::decay_t<decltype(s)>;
      return sq(T(1.0) + sqrt(T(1.0) - s * s));
    });
    fam.name = "family-rn";
    fam.xy_domain =
        Domain::box({{0.3, 3}, {-3, 3}}).with_predicate([](const Vec& xy) {
          return std::abs(xy[1] / xy[0]) <= 0.9 ? -1 : 1;
        });
    PotentialModel f = flat_family_potential(fam);
    Domain sample = Domain::box({{0.5, 2}, {-1, 1}});
    out.push_back({"family-rn.psi", f, [f, sample](SplitMix64& rng) {
                     for (;;) {
                       Vec p(2);
                       p << rng.uniform(sample.lo[0], sample.hi[0]),
                           rng.uniform(sample.lo[1], sample.hi[1]);
                       if (std::abs(p[1] / p[0]) <= 0.8) return p;
                     }
                   }});
  }
  return out;
}

std::vector<NamedMetric> builtin_metrics() {
  std::vector<NamedMetric> out;

  GaussianModel g = gaussian_model();
  out.push_back({"gaussian.riemannian", g.riemannian,
                 Domain::box({{-2, 2}, {0.2, 3}}),
                 NamedMetric::Expectation::Constant, -1.0, nullptr,
                 "constant negative curvature"});

  RnModel rn = rn_model();
  out.push_back({"rn.ruppeiner", rn.ruppeiner,
                 Domain::box({{0.5, 2}, {-kExtremalCap, kExtremalCap}}),
                 NamedMetric::Expectation::Flat, 0.0, nullptr, "flat"});
  out.push_back({"rn.weinhold", rn.weinhold,
                 Domain::box({{0.5, 2}, {-kExtremalCap, kExtremalCap}}),
                 NamedMetric::Expectation::Curved, 0.0,
                 [](const Vec& x) {
                   double S = x[0], u = x[1];
                   return 2.0 / (std::sqrt(S) * sq(1 - u * u));
                 },
                 "curved: R = 2/(sqrt(S)(1-u^2)^2)"});

  KerrModel k = kerr_model(KerrBranch::Outer);
  out.push_back({"kerr.weinhold", k.weinhold,
                 Domain::box({{0.5, 2}, {-kExtremalCap, kExtremalCap}}),
                 NamedMetric::Expectation::Curved, 0.0,
                 [](const Vec& x) {
                   double M = x[0], s2 = x[1] * x[1];
                   double w = std::sqrt(1 - s2);
                   double num = -s2 * s2 * w / 4 - s2 * s2 / 2 - s2 + 2 * w + 2;
                   double den = s2 * s2 * w + 4 * s2 * s2 - 8 * s2 * w -
                                12 * s2 + 8 * w + 8;
                   return num / (M * M * den);
                 },
                 "curved: R(M,0) = 1/(4 M^2)"});
  out.push_back({"kerr.mass_weinhold", k.mass_weinhold,
                 Domain::box({{0.5, 2}, {-0.15, 0.15}}),
                 NamedMetric::Expectation::Flat, 0.0, nullptr,
                 "mass-representation metric, flat"});
  return out;
}

DuallyFlatModel builtin_model(const std::string& name) {
  if (name == "quadratic") return quadratic_model(2);
  if (name == "gaussian") return gaussian_model().model;
  if (name == "kerr-outer") return kerr_model(KerrBranch::Outer).model;
  if (name == "kerr-inner") return kerr_model(KerrBranch::Inner).model;
  if (name == "rn") return rn_model().model;
  throw InvalidArgument("unknown model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"quadratic", "gaussian", "kerr-outer", "kerr-inner", "rn"};
}

std::optional<GaugeField> builtin_gauge(const std::string& name,
                                        const DuallyFlatModel& model,
                                        Chart chart) {
  if (name.empty() || name == "none") return std::nullopt;
  if (name == "sigma_inverse") {
    if (model.name != "gaussian" || chart != Chart::Eta) {
      throw InvalidArgument(
          "gauge 'sigma_inverse' is defined for the gaussian eta-chart flow");
    }
    return gaussian_model().sigma_gauge;
  }
  throw InvalidArgument("unknown gauge '" + name + "'");
}

}  // namespace igflow
