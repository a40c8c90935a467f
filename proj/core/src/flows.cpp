#include "igflow/flows.hpp"

#include <cmath>

#include "igflow/metric.hpp"

namespace igflow {

namespace {

const PotentialModel& chart_potential(const FlowSpec& spec) {
  if (spec.chart == Chart::Theta) {
    if (!spec.model.psi) {
      throw InvalidArgument(spec.model.name + ": theta-chart flow needs psi");
    }
    return *spec.model.psi;
  }
  if (!spec.model.psi_star) {
    throw InvalidArgument(spec.model.name + ": eta-chart flow needs psi_star");
  }
  return *spec.model.psi_star;
}

void check_chart(const FlowSpec& spec, const Point& x, const char* who) {
  if (x.chart != chart_name(spec.chart)) {
    throw InvalidArgument(std::string(who) + ": point chart '" + x.chart +
                          "' does not match flow chart '" +
                          chart_name(spec.chart) + "'");
  }
  if (spec.gauge && spec.gauge->chart != spec.chart) {
    throw InvalidArgument(std::string(who) + ": gauge field lives in the '" +
                          std::string(chart_name(spec.gauge->chart)) +
                          "' chart");
  }
}

struct ChartGeom {
  Vec grad;   // gradient of the chart potential (the dual coordinates)
  Mat hess;   // chart metric V: g_ij(theta) resp. g*^{ij}(eta)
  Mat inv;    // W = V^{-1}
  Vec gauge;  // A in this chart (zero when undeformed)
};

ChartGeom chart_geometry(const FlowSpec& spec, const Point& x) {
  const PotentialModel& f = chart_potential(spec);
  Jet2 j = jet2(f, x);
  ChartGeom g;
  g.grad = j.grad;
  g.hess = j.hess;
  g.inv = invert_metric(j.hess, f.name());
  g.gauge = spec.gauge ? spec.gauge->eval(x.x) : Vec(Vec::Zero(x.dim()));
  return g;
}

// Gauge-covariant form of the flow's own momentum: eta - A in the
// theta-chart, -(theta + A*) in the eta-chart.
Vec own_covariant_momentum(const FlowSpec& spec, const ChartGeom& g) {
  return spec.chart == Chart::Theta ? Vec(g.grad - g.gauge)
                                    : Vec(-g.grad - g.gauge);
}

}  // namespace

Vec flow_rhs(const FlowSpec& spec, const Point& x) {
  check_chart(spec, x, "flow_rhs");
  ChartGeom g = chart_geometry(spec, x);
  if (spec.chart == Chart::Theta) {
    return spec.direction * (g.inv * (g.grad - g.gauge));
  }
  return spec.direction * (-(g.inv * (g.grad + g.gauge)));
}

double linear_rhs_check(const FlowSpec& spec, const Point& x) {
  check_chart(spec, x, "linear_rhs_check");
  ChartGeom g = chart_geometry(spec, x);
  Vec v;
  Vec law;
  if (spec.chart == Chart::Theta) {
    v = spec.direction * (g.inv * (g.grad - g.gauge));
    law = spec.direction * (g.grad - g.gauge);  // d eta/dt
  } else {
    v = spec.direction * (-(g.inv * (g.grad + g.gauge)));
    law = spec.direction * (-g.grad - g.gauge);  // d theta/dt
  }
  Vec pushed = g.hess * v;
  return (pushed - law).cwiseAbs().maxCoeff();
}

double conformal_factor_sq(const FlowSpec& spec, const Point& x) {
  check_chart(spec, x, "conformal_factor");
  ChartGeom g = chart_geometry(spec, x);
  Vec m = own_covariant_momentum(spec, g);
  return m.dot(g.inv * m);
}

double conformal_factor(const FlowSpec& spec, const Point& x) {
  double c2 = conformal_factor_sq(spec, x);
  if (c2 < 0) {
    throw ConstraintError("conformal_factor: C^2 = " + std::to_string(c2) +
                          " is negative at the given point");
  }
  return std::sqrt(c2);
}

Vec flow_momentum(const FlowSpec& spec, const Point& x) {
  check_chart(spec, x, "flow_momentum");
  const PotentialModel& f = chart_potential(spec);
  Vec grad = jet2(f, x).grad;
  return spec.chart == Chart::Theta ? grad : Vec(-grad);
}

namespace {

Vec dual_of(const FlowSpec& spec, const Vec& state) {
  Point p{state, chart_name(spec.chart)};
  return spec.chart == Chart::Theta ? eta_from_theta(spec.model, p).x
                                    : theta_from_eta(spec.model, p).x;
}

}  // namespace

Trajectory integrate(const FlowSpec& spec, const Point& x0, double t_end,
                     int steps) {
  check_chart(spec, x0, "integrate");
  if (steps < 10) {
    throw InvalidArgument("integrate: steps >= 10 required");
  }
  if (!(t_end > 0)) {
    throw InvalidArgument("integrate: t_end must be positive");
  }
  const Domain& dom = chart_potential(spec).domain();
  require_in_domain(dom, x0.x, "integrate");

  const int n = x0.dim();
  const double dt = t_end / steps;
  const char* chart = chart_name(spec.chart);

  Trajectory traj;
  traj.chart = spec.chart;
  traj.deformed = spec.deformed();
  traj.direction = spec.direction;

  Vec eta0, theta0;
  {
    Vec dual0 = dual_of(spec, x0.x);
    if (spec.chart == Chart::Eta) {
      eta0 = x0.x;
      theta0 = dual0;
    } else {
      theta0 = x0.x;
      eta0 = dual0;
    }
  }

  auto rhs = [&](const Vec& state) {
    return flow_rhs(spec, Point{state, chart});
  };

  auto record = [&](double t, double lambda, const Vec& state) {
    TrajectorySample s;
    s.t = t;
    s.lambda = lambda;
    s.coords = state;
    s.dual = dual_of(spec, state);
    Point p{state, chart};
    double c2 = conformal_factor_sq(spec, p);
    Vec own = flow_momentum(spec, p);
    bool fixed_point = own.cwiseAbs().maxCoeff() == 0.0;
    if (c2 < 0 || (c2 == 0 && !fixed_point)) {
      throw ConstraintError("integrate: degenerate flow velocity");
    }
    s.conformal = std::sqrt(std::max(0.0, c2));
    // at a fixed point the unit constraint holds as a limit
    s.phi = fixed_point ? 1.0 : constraint_value(spec, p, own);
    if (!spec.deformed()) {
      s.products = Mat(n, n);
      double sdir = spec.direction;
      if (spec.chart == Chart::Eta) {
        // synthetic growing eta paired with the integrated decaying theta
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            s.products(i, j) = eta0[i] * std::exp(sdir * t) * s.dual[j];
      } else {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            s.products(i, j) = s.dual[i] * theta0[j] * std::exp(-sdir * t);
      }
    }
    traj.samples.push_back(std::move(s));
  };

  Vec state = x0.x;
  double lambda = 0;
  record(0.0, 0.0, state);

  for (int k = 0; k < steps; ++k) {
    double t = k * dt;
    // leaving the valid region shows up as a box violation, a singular
    // metric, or a sign flip of C^2; all three halt with a partial result
    try {
      Vec k1 = rhs(state);
      Vec k2 = rhs(state + 0.5 * dt * k1);
      Vec k3 = rhs(state + 0.5 * dt * k2);
      Vec k4 = rhs(state + dt * k3);
      Vec next = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!dom.contains(next) || !next.allFinite()) {
        throw DomainError("integrate: state left the domain", -1);
      }
      double c2_prev = traj.samples.back().conformal;
      c2_prev *= c2_prev;
      double c2 = conformal_factor_sq(spec, Point{next, chart});
      state = next;
      lambda += 0.5 * (c2_prev + c2) * dt;
      record(t + dt, lambda, state);
    } catch (const DomainError&) {
      traj.status = Trajectory::Status::DomainExit;
      traj.exit_step = k;
      return traj;
    } catch (const SingularMetricError&) {
      traj.status = Trajectory::Status::DomainExit;
      traj.exit_step = k;
      return traj;
    } catch (const ConstraintError&) {
      traj.status = Trajectory::Status::DomainExit;
      traj.exit_step = k;
      return traj;
    }
  }
  return traj;
}

Mat conserved_products(const Trajectory& traj) {
  if (traj.deformed) {
    throw InvalidArgument(
        "conserved_products: no conservation is claimed for deformed flows");
  }
  if (traj.samples.empty()) {
    throw InvalidArgument("conserved_products: empty trajectory");
  }
  const Mat& k0 = traj.samples.front().products;
  Mat drift = Mat::Zero(k0.rows(), k0.cols());
  for (const auto& s : traj.samples) {
    drift = drift.cwiseMax((s.products - k0).cwiseAbs());
  }
  return drift;
}

double constraint_value(const FlowSpec& spec, const Point& x, const Vec& p) {
  check_chart(spec, x, "constraint_value");
  if (p.size() != x.dim()) {
    throw InvalidArgument("constraint_value: momentum dimension mismatch");
  }
  ChartGeom g = chart_geometry(spec, x);
  Vec pi = p - g.gauge;
  double q = pi.dot(g.inv * pi);
  if (q < 0) {
    throw ConstraintError("constraint_value: negative radicand");
  }
  Vec m = own_covariant_momentum(spec, g);
  double c2 = m.dot(g.inv * m);
  if (!(c2 > 0)) {
    throw ConstraintError("constraint_value: non-positive C^2");
  }
  return std::sqrt(q / c2);
}

namespace {

// Direct phase-space partials of Phi. Shared by constraint_rhs (which adds
// the unit-constraint precondition) and by the constraint integrator, whose
// RK4 stages sit a roundoff-distance off shell.
PhaseVelocity constraint_partials(const FlowSpec& spec, const Point& x,
                                  const Vec& p) {
  const PotentialModel& f = chart_potential(spec);
  const int n = x.dim();
  Jet3 j3 = jet3(f, x);
  Mat V = j3.hess;
  Mat W = invert_metric(V, f.name());
  Vec A = spec.gauge ? spec.gauge->eval(x.x) : Vec(Vec::Zero(n));
  Mat dA = spec.gauge ? spec.gauge->jacobian(x.x) : Mat(Mat::Zero(n, n));

  Vec pi = p - A;
  Vec wpi = W * pi;
  double q = pi.dot(wpi);
  if (q < 0) {
    throw ConstraintError("constraint_rhs: negative radicand");
  }
  double sq = std::sqrt(q);

  double own_sign = spec.chart == Chart::Theta ? 1.0 : -1.0;
  Vec m = own_sign * j3.grad - A;
  Vec wm = W * m;
  double c2 = m.dot(wm);
  if (!(c2 > 0)) {
    throw ConstraintError("constraint_rhs: non-positive C^2");
  }
  double c = std::sqrt(c2);
  double phi = sq / c;

  PhaseVelocity out;
  out.dx = wpi / (c2 * phi);
  out.dp = Vec(n);

  for (int k = 0; k < n; ++k) {
    Mat dW = -W * j3.third[k] * W;  // d_k of the inverse chart metric
    // d_k pi = -d_k A;  dA(i,k) = dA_i/dx^k
    double dq = pi.dot(dW * pi) - 2.0 * wpi.dot(dA.col(k));
    // d_k m: the dual coordinates vary with the chart Hessian row
    Vec dm = own_sign * V.col(k) - dA.col(k);
    double dc2 = m.dot(dW * m) + 2.0 * wm.dot(dm);
    double dc = dc2 / (2.0 * c);
    double dphi = dq / (2.0 * sq * c) - (sq / c2) * dc;
    out.dp[k] = -dphi;
  }
  return out;
}

}  // namespace

PhaseVelocity constraint_rhs(const FlowSpec& spec, const Point& x,
                             const Vec& p) {
  check_chart(spec, x, "constraint_rhs");
  double phi = constraint_value(spec, x, p);
  if (std::abs(phi - 1.0) > 1e-8) {
    throw ConstraintError("constraint_rhs: Phi(x,p) = " + std::to_string(phi) +
                          " violates the unit constraint");
  }
  return constraint_partials(spec, x, p);
}

ConstraintTrajectory integrate_constraint(const FlowSpec& spec,
                                          const Point& x0, const Vec& p0,
                                          double lambda_end, int steps) {
  check_chart(spec, x0, "integrate_constraint");
  if (steps < 10) {
    throw InvalidArgument("integrate_constraint: steps >= 10 required");
  }
  double phi0 = constraint_value(spec, x0, p0);
  if (std::abs(phi0 - 1.0) > 1e-8) {
    throw ConstraintError("integrate_constraint: initial momentum violates "
                          "the unit constraint");
  }

  const int n = x0.dim();
  const double dl = lambda_end / steps;
  const char* chart = chart_name(spec.chart);

  auto rhs = [&](const Vec& y) {
    PhaseVelocity v =
        constraint_partials(spec, Point{y.head(n), chart}, y.tail(n));
    Vec dy(2 * n);
    dy.head(n) = v.dx;
    dy.tail(n) = v.dp;
    return dy;
  };

  ConstraintTrajectory out;
  Vec y(2 * n);
  y.head(n) = x0.x;
  y.tail(n) = p0;

  auto record = [&](double lambda) {
    ConstraintSample s;
    s.lambda = lambda;
    s.x = y.head(n);
    s.p = y.tail(n);
    s.phi = constraint_value(spec, Point{s.x, chart}, s.p);
    out.max_phi_drift = std::max(out.max_phi_drift, std::abs(s.phi - 1.0));
    out.samples.push_back(std::move(s));
  };

  record(0.0);
  for (int k = 0; k < steps; ++k) {
    Vec k1 = rhs(y);
    Vec k2 = rhs(y + 0.5 * dl * k1);
    Vec k3 = rhs(y + 0.5 * dl * k2);
    Vec k4 = rhs(y + dl * k3);
    y = y + (dl / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    record((k + 1) * dl);
  }
  return out;
}

Trajectory reparametrize(const Trajectory& traj, Param target) {
  Trajectory out = traj;
  if (target == traj.param) return out;
  for (size_t k = 1; k < traj.samples.size(); ++k) {
    if (!(traj.samples[k].lambda > traj.samples[k - 1].lambda)) {
      throw ConstraintError(
          "reparametrize: lambda is not strictly increasing (C^2 <= 0 "
          "somewhere along the trajectory)");
    }
  }
  out.param = target;
  return out;
}

double Trajectory::step() const {
  if (samples.size() < 2) {
    throw InvalidArgument("trajectory: need at least 2 samples for a step");
  }
  double dt = param_of(samples[1]) - param_of(samples[0]);
  for (size_t k = 1; k < samples.size(); ++k) {
    double d = param_of(samples[k]) - param_of(samples[k - 1]);
    if (std::abs(d - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InvalidArgument("trajectory: non-uniform parameter spacing");
    }
  }
  return dt;
}

GeodesicResidual trajectory_geodesic_residual(const MetricField& g,
                                              const Trajectory& traj,
                                              Track track) {
  double dt = traj.step();
  std::vector<Vec> samples;
  samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    samples.push_back(track == Track::Coords ? s.coords : s.dual);
  }
  return geodesic_residual(g, samples, dt);
}

double rf_line_element(const FlowSpec& spec, const Point& x, const Vec& dx) {
  check_chart(spec, x, "rf_line_element");
  if (dx.size() != x.dim()) {
    throw InvalidArgument("rf_line_element: displacement dimension mismatch");
  }
  if (!dx.allFinite()) {
    throw InvalidArgument("rf_line_element: non-finite displacement");
  }
  ChartGeom g = chart_geometry(spec, x);
  Vec m = own_covariant_momentum(spec, g);
  double c2 = m.dot(g.inv * m);
  if (!(c2 > 0)) {
    throw ConstraintError("rf_line_element: non-positive C^2");
  }
  double radicand = dx.dot(g.hess * dx) / c2;
  if (radicand < 0) {
    throw ConstraintError("rf_line_element: negative radicand");
  }
  return std::sqrt(radicand) + g.gauge.dot(dx) / c2;
}

}  // namespace igflow
