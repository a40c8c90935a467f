#include "igflow/dualflat.hpp"

#include <cmath>

#include "igflow/metric.hpp"

namespace igflow {

Vec DuallyFlatModel::sample_display(SplitMix64& rng) const {
  // rejection sampling against the box predicate, if any
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec p(sample_box.dim());
    for (int i = 0; i < p.size(); ++i) {
      p[i] = rng.uniform(sample_box.lo[i], sample_box.hi[i]);
    }
    if (sample_box.contains(p)) return p;
  }
  throw InvalidArgument(name + ": sample box rejects every draw");
}

const Domain& DuallyFlatModel::theta_domain() const {
  if (psi) return psi->domain();
  throw InvalidArgument(name + ": no theta-chart potential");
}

const Domain& DuallyFlatModel::eta_domain() const {
  if (psi_star) return psi_star->domain();
  throw InvalidArgument(name + ": no eta-chart potential");
}

NewtonResult newton_invert_gradient(const PotentialModel& f, const Vec& target,
                                    const Vec& initial_guess, double tol) {
  Vec x = initial_guess;
  const int max_iter = 100;
  double best = INFINITY;

  auto residual = [&](const Vec& p) -> Vec {
    return jet2(f, Point{p, f.chart()}).grad - target;
  };

  Vec r = residual(x);
  for (int it = 0; it < max_iter; ++it) {
    double rn = r.norm();
    best = std::min(best, rn);
    if (rn <= tol) return {x, rn, it};

    // true (possibly indefinite) Jacobian of the gradient map
    Mat jac = jet2(f, Point{x, f.chart()}).hess;
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) {
      throw NewtonError(f.name() + ": singular Jacobian in Newton solve", best);
    }
    Vec step = lu.solve(-r);

    // Armijo backtracking on |r|^2, staying inside the domain
    double alpha = 1.0;
    double f0 = rn * rn;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec cand = x + alpha * step;
      if (f.domain().contains(cand)) {
        Vec rc = residual(cand);
        if (rc.squaredNorm() <= f0 * (1.0 - 1e-4 * alpha)) {
          x = cand;
          r = rc;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      throw NewtonError(f.name() + ": Newton line search stalled", best);
    }
  }
  double rn = r.norm();
  if (rn <= tol) return {x, rn, max_iter};
  throw NewtonError(f.name() + ": Newton did not converge in 100 iterations",
                    std::min(best, rn));
}

Point eta_from_theta(const DuallyFlatModel& m, const Point& theta) {
  if (m.psi) {
    return Point{jet2(*m.psi, theta).grad, "eta"};
  }
  if (m.eta_of_theta) {
    return Point{m.eta_of_theta->eval(theta.x), "eta"};
  }
  if (!m.psi_star) {
    throw InvalidArgument(m.name + ": no potential available");
  }
  Vec guess = m.guess_eta_of_theta ? m.guess_eta_of_theta(theta.x) : theta.x;
  NewtonResult r = newton_invert_gradient(*m.psi_star, theta.x, guess);
  return Point{r.x, "eta"};
}

Point theta_from_eta(const DuallyFlatModel& m, const Point& eta) {
  if (m.psi_star) {
    return Point{jet2(*m.psi_star, eta).grad, "theta"};
  }
  if (m.theta_of_eta) {
    return Point{m.theta_of_eta->eval(eta.x), "theta"};
  }
  if (!m.psi) {
    throw InvalidArgument(m.name + ": no potential available");
  }
  Vec guess = m.guess_theta_of_eta ? m.guess_theta_of_eta(eta.x) : eta.x;
  NewtonResult r = newton_invert_gradient(*m.psi, eta.x, guess);
  return Point{r.x, "theta"};
}

namespace {

// Hessian of the theta-chart potential by the most independent route the
// model offers: jet of psi, else Jacobian of the closed eta(theta) map,
// else a central difference through the Newton inversion.
Mat theta_metric(const DuallyFlatModel& m, const Vec& theta) {
  if (m.psi) return jet2(*m.psi, Point{theta, "theta"}).hess;
  if (m.eta_of_theta) {
    Mat j = m.eta_of_theta->jacobian(theta);
    return 0.5 * (j + j.transpose());
  }
  const int n = static_cast<int>(theta.size());
  Mat g(n, n);
  for (int k = 0; k < n; ++k) {
    double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
    Point p{theta, "theta"}, q{theta, "theta"};
    p.x[k] += h;
    q.x[k] -= h;
    g.col(k) =
        (eta_from_theta(m, p).x - eta_from_theta(m, q).x) / (p.x[k] - q.x[k]);
  }
  return 0.5 * (g + g.transpose());
}

}  // namespace

Mat metric_at(const DuallyFlatModel& m, const Point& x) {
  if (x.chart == "theta") return theta_metric(m, x.x);
  if (x.chart == "eta") {
    if (m.psi_star) return jet2(*m.psi_star, x).hess;
    if (m.theta_of_eta) {
      Mat j = m.theta_of_eta->jacobian(x.x);
      return 0.5 * (j + j.transpose());
    }
    throw InvalidArgument(m.name + ": eta-chart metric needs psi_star");
  }
  throw InvalidArgument(m.name + ": metric_at expects chart theta or eta, got " +
                        x.chart);
}

double duality_residual(const DuallyFlatModel& m, const Point& x) {
  Point theta = x.chart == "theta" ? x : theta_from_eta(m, x);
  Point eta = x.chart == "eta" ? x : eta_from_theta(m, theta);
  Mat g = theta_metric(m, theta.x);
  Mat gs = metric_at(m, eta);
  const int n = static_cast<int>(g.rows());
  return (g * gs - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
}

double legendre_residual(const DuallyFlatModel& m, const Point& x) {
  if (!m.psi || !m.psi_star) {
    throw InvalidArgument(m.name + ": Legendre residual needs both potentials");
  }
  Point theta = x.chart == "theta" ? x : theta_from_eta(m, x);
  Point eta = x.chart == "eta" ? x : eta_from_theta(m, theta);
  double lhs = m.psi->value(theta.x) + m.psi_star->value(eta.x);
  return std::abs(lhs - eta.x.dot(theta.x));
}

}  // namespace igflow
