#include "igflow/canonical.hpp"

#include <cmath>

#include "igflow/jets.hpp"

namespace igflow {

CanonicalImage canonical_map(const DuallyFlatModel& m, const Point& theta) {
  if (theta.chart != "theta") {
    throw InvalidArgument(m.name + ": canonical_map expects a theta-chart point");
  }
  Point eta = eta_from_theta(m, theta);
  CanonicalImage img;
  img.theta_hat = eta.x;
  img.eta_hat = -theta.x;
  if (m.psi_star) img.xi = -m.psi_star->value(eta.x);
  if (m.psi) img.xi_star = -m.psi->value(theta.x);
  return img;
}

double dual_flow_residual(const DuallyFlatModel& m, const Trajectory& traj) {
  (void)m;
  if (traj.chart != Chart::Theta) {
    throw InvalidArgument(
        "dual_flow_residual: expects a theta-chart ascent trajectory");
  }
  const int count = static_cast<int>(traj.samples.size());
  if (count < 5) {
    throw InvalidArgument("dual_flow_residual: need at least 5 samples");
  }
  double dt = traj.step();

  // theta_hat(t) = eta(t), the stored dual track.
  double res = 0;
  for (int s = 2; s < count - 2; ++s) {
    const Vec &m2 = traj.samples[s - 2].dual, &m1 = traj.samples[s - 1].dual,
              &p1 = traj.samples[s + 1].dual, &p2 = traj.samples[s + 2].dual;
    Vec d_dt = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * dt);
    // clock reversal: d/dt* = -d/dt
    Vec d_dtstar = -d_dt;
    Vec r = d_dtstar + traj.samples[s].dual;
    res = std::max(res, r.cwiseAbs().maxCoeff());
  }
  return res;
}

double generating_residual(const DuallyFlatModel& m, const Point& theta,
                           SplitMix64& rng) {
  if (theta.chart != "theta") {
    throw InvalidArgument(m.name + ": generating_residual expects theta chart");
  }
  if (!m.psi || !m.psi_star) {
    throw InvalidArgument(m.name + ": generating_residual needs both potentials");
  }
  const int n = theta.dim();

  // xi as a function of theta through the map: xi(theta) = -Psi*(eta(theta)).
  auto xi_of = [&](const Vec& th) {
    Point p{th, "theta"};
    return -m.psi_star->value(eta_from_theta(m, p).x);
  };

  // analytic side: grad(Psi - G) = eta - (eta + g.theta) = -g.theta
  Jet2 j = jet2(*m.psi, theta);
  Vec analytic = -(j.hess * theta.x);

  double res = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.uniform(-1.0, 1.0);
    double norm = u.norm();
    if (norm == 0) continue;
    u /= norm;

    double h = 1e-5 * std::max(1.0, theta.x.norm());
    double fd = (xi_of(theta.x + h * u) - xi_of(theta.x - h * u)) / (2 * h);
    res = std::max(res, std::abs(fd - analytic.dot(u)));
  }
  return res;
}

}  // namespace igflow
