#include "igflow/metric.hpp"

#include <cmath>

namespace igflow {

namespace {

struct HessianImpl final : MetricField::Impl {
  PotentialModel f;

  HessianImpl(PotentialModel fn)
      : Impl(fn.name() + ".hessian-metric", fn.domain(),
             MetricField::Provenance::HessianDerived),
        f(std::move(fn)) {}

  Mat eval(const Vec& x) const override {
    return jet2(f, Point{x, f.chart()}).hess;
  }
  void derivatives(const Vec& x, Mat& g, Ten3& dg) const override {
    Jet3 j = jet3(f, Point{x, f.chart()});
    g = j.hess;
    dg = j.third;  // d_k g_ij = third[k](i,j)
  }
  void derivatives2(const Vec& x, Mat& g, Ten3& dg, Ten4& d2g) const override {
    derivatives(x, g, dg);
    d2g = jet4(f, Point{x, f.chart()});
  }
};

struct FdImpl final : MetricField::Impl {
  std::function<Mat(const Vec&)> g_fn;

  FdImpl(std::string n, Domain d, std::function<Mat(const Vec&)> g)
      : Impl(std::move(n), std::move(d), MetricField::Provenance::ClosedForm),
        g_fn(std::move(g)) {}

  Mat eval(const Vec& x) const override { return g_fn(x); }

  // Five-point first derivative: (-f(2h) + 8f(h) - 8f(-h) + f(-2h)) / 12h.
  Mat d1(const Vec& x, int k, double h) const {
    Vec p = x;
    auto at = [&](double s) {
      p[k] = x[k] + s;
      return g_fn(p);
    };
    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }

  void derivatives(const Vec& x, Mat& g, Ten3& dg) const override {
    g = g_fn(x);
    const int n = static_cast<int>(x.size());
    dg = Ten3(n);
    for (int k = 0; k < n; ++k) {
      dg[k] = d1(x, k, 1e-5 * std::max(1.0, std::abs(x[k])));
    }
  }

  void derivatives2(const Vec& x, Mat& g, Ten3& dg, Ten4& d2g) const override {
    derivatives(x, g, dg);
    const int n = static_cast<int>(x.size());
    d2g = Ten4(n);
    for (int l = 0; l < n; ++l) {
      double h = 1e-3 * std::max(1.0, std::abs(x[l]));
      Vec p = x;
      auto dg_at = [&](double s) {
        p[l] = x[l] + s;
        Mat gg;
        Ten3 d;
        derivatives(p, gg, d);
        return d;
      };
      Ten3 a2 = dg_at(2 * h), a1 = dg_at(h), b1 = dg_at(-h), b2 = dg_at(-2 * h);
      for (int k = 0; k < n; ++k) {
        d2g[k][l] = (-a2[k] + 8 * a1[k] - 8 * b1[k] + b2[k]) / (12 * h);
      }
    }
  }
};

}  // namespace

// Closed-form entries evaluated on duals give exact first and second metric
// derivatives.
Mat MetricField::ClosedBase::eval(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  std::vector<double> c(x.data(), x.data() + n);
  std::vector<double> e = ev0(c);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = e[i * n + j];
  return 0.5 * (g + g.transpose());
}

void MetricField::ClosedBase::derivatives(const Vec& x, Mat& g,
                                          Ten3& dg) const {
  const int n = static_cast<int>(x.size());
  g = Mat(n, n);
  dg = Ten3(n);
  for (int k = 0; k < n; ++k) {
    std::vector<D1> z(n);
    for (int m = 0; m < n; ++m) z[m] = D1{x[m], m == k ? 1.0 : 0.0};
    std::vector<D1> e = ev1(z);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (k == 0) g(i, j) = e[i * n + j].v;
        dg[k](i, j) = e[i * n + j].d;
      }
    }
  }
}

void MetricField::ClosedBase::derivatives2(const Vec& x, Mat& g, Ten3& dg,
                                           Ten4& d2g) const {
  derivatives(x, g, dg);
  const int n = static_cast<int>(x.size());
  d2g = Ten4(n);
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      std::vector<D2> z(n);
      for (int m = 0; m < n; ++m) {
        z[m] = D2{D1{x[m], m == l ? 1.0 : 0.0}, D1{m == k ? 1.0 : 0.0, 0.0}};
      }
      std::vector<D2> e = ev2(z);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          d2g[k][l](i, j) = e[i * n + j].d.d;
          d2g[l][k](i, j) = e[i * n + j].d.d;
        }
      }
    }
  }
}

MetricField MetricField::hessian_of(PotentialModel f) {
  MetricField m;
  m.impl_ = std::make_shared<HessianImpl>(std::move(f));
  return m;
}

MetricField MetricField::closed_form_fd(std::string name, Domain domain,
                                        std::function<Mat(const Vec&)> g) {
  MetricField m;
  m.impl_ = std::make_shared<FdImpl>(std::move(name), std::move(domain),
                                     std::move(g));
  return m;
}

const std::string& MetricField::name() const { return impl_->name; }
const Domain& MetricField::domain() const { return impl_->domain; }
int MetricField::dim() const { return impl_->domain.dim(); }
MetricField::Provenance MetricField::provenance() const {
  return impl_->provenance;
}

Mat MetricField::eval(const Vec& x) const {
  require_in_domain(impl_->domain, x, impl_->name);
  return impl_->eval(x);
}

void MetricField::derivatives(const Vec& x, Mat& g, Ten3& dg) const {
  require_in_domain(impl_->domain, x, impl_->name);
  impl_->derivatives(x, g, dg);
}

void MetricField::derivatives2(const Vec& x, Mat& g, Ten3& dg,
                               Ten4& d2g) const {
  require_in_domain(impl_->domain, x, impl_->name);
  impl_->derivatives2(x, g, dg, d2g);
}

std::pair<int, int> MetricField::signature_at(const Vec& x) const {
  Mat g = eval(x);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  int pos = 0, neg = 0;
  for (int i = 0; i < g.rows(); ++i) {
    if (es.eigenvalues()[i] > 0) ++pos;
    if (es.eigenvalues()[i] < 0) ++neg;
  }
  return {pos, neg};
}

Mat invert_metric(const Mat& g, const std::string& who, double* condition) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(g.rows() - 1);
  if (condition) *condition = smin > 0 ? smax / smin : INFINITY;
  if (!(smin > 0) || smax / smin > 1e14) {
    throw SingularMetricError(who + ": metric numerically singular");
  }
  Eigen::FullPivLU<Mat> lu(g);
  return lu.inverse();
}

Ten3 christoffel(const MetricField& g, const Point& x) {
  const int n = g.dim();
  Mat gm;
  Ten3 dg;
  g.derivatives(x.x, gm, dg);
  Mat ginv = invert_metric(gm, g.name());

  Ten3 gamma(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double s = 0;
        for (int l = 0; l < n; ++l) {
          s += ginv(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
        }
        gamma[i](j, k) = 0.5 * s;
        gamma[i](k, j) = 0.5 * s;
      }
    }
  }
  return gamma;
}

namespace {

// Christoffels and their coordinate derivatives from exact metric data.
void christoffel_with_derivatives(const Mat& g, const Ten3& dg, const Ten4& d2g,
                                  const std::string& who, Ten3& gamma,
                                  Ten4& dgamma, Mat& ginv, double& condition) {
  const int n = static_cast<int>(g.rows());
  ginv = invert_metric(g, who, &condition);

  gamma = Ten3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int l = 0; l < n; ++l)
          s += ginv(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
        gamma[i](j, k) = 0.5 * s;
      }

  // d_m g^il = -g^ia (d_m g_ab) g^bl
  Ten3 dginv(n);
  for (int m = 0; m < n; ++m) dginv[m] = -ginv * dg[m] * ginv;

  dgamma = Ten4(n);  // dgamma[m][i](j,k) = d_m Gamma^i_jk
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double s = 0;
          for (int l = 0; l < n; ++l) {
            s += dginv[m](i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
            s += ginv(i, l) *
                 (d2g[m][j](l, k) + d2g[m][k](j, l) - d2g[m][l](j, k));
          }
          dgamma[m][i](j, k) = 0.5 * s;
        }
      }
    }
  }
}

}  // namespace

double ricci_scalar(const MetricField& g, const Point& x) {
  return curvature_report(g, x).ricci_scalar;
}

CurvatureReport curvature_report(const MetricField& g, const Point& x,
                                 double tol) {
  const int n = g.dim();
  Mat gm;
  Ten3 dg;
  Ten4 d2g;
  g.derivatives2(x.x, gm, dg, d2g);

  Ten3 gamma;
  Ten4 dgamma;
  Mat ginv;
  double condition = 0;
  christoffel_with_derivatives(gm, dg, d2g, g.name(), gamma, dgamma, ginv,
                               condition);

  // Ricci tensor R_jl = R^i_jil
  Mat ric = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      double s = 0;
      for (int i = 0; i < n; ++i) {
        s += dgamma[i][i](l, j) - dgamma[l][i](i, j);
        for (int m = 0; m < n; ++m) {
          s += gamma[i](i, m) * gamma[m](l, j) - gamma[i](l, m) * gamma[m](i, j);
        }
      }
      ric(j, l) = s;
    }
  }
  double r = (ginv.cwiseProduct(ric)).sum();

  CurvatureReport rep;
  rep.point = x;
  rep.christoffel = gamma;
  rep.ricci_scalar = r;
  rep.tol = tol;
  rep.flat = std::abs(r) <= tol;
  rep.condition = condition;
  rep.near_degenerate = condition > 1e10;
  return rep;
}

GeodesicResidual geodesic_residual(const MetricField& g,
                                   const std::vector<Vec>& samples, double dt) {
  const int m = static_cast<int>(samples.size());
  if (m < 5) {
    throw InvalidArgument("geodesic_residual: need at least 5 samples");
  }
  if (!(dt > 0)) {
    throw InvalidArgument("geodesic_residual: non-positive spacing");
  }

  GeodesicResidual out;
  // fourth-order interior stencils need two neighbours each side
  for (int s = 2; s < m - 2; ++s) {
    const Vec &m2 = samples[s - 2], &m1 = samples[s - 1], &p0 = samples[s],
              &p1 = samples[s + 1], &p2 = samples[s + 2];
    Vec vel = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * dt);
    Vec acc = (-m2 + 16 * m1 - 30 * p0 + 16 * p1 - p2) / (12 * dt * dt);

    Ten3 gamma = christoffel(g, Point{p0, "curve"});
    Vec res = acc;
    for (int i = 0; i < p0.size(); ++i) {
      res[i] += vel.dot(gamma[i] * vel);
    }
    out.affine = std::max(out.affine, res.cwiseAbs().maxCoeff());
    out.non_affine =
        std::max(out.non_affine, (acc + vel).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace igflow
