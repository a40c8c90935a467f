#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igflow/dualflat.hpp"
#include "igflow/metric.hpp"
#include "igflow/types.hpp"

namespace igflow {

enum class Chart { Theta, Eta };

inline const char* chart_name(Chart c) {
  return c == Chart::Theta ? "theta" : "eta";
}

// Covector field A_i(theta) in the theta-chart, vector field A*^i(eta) in
// the eta-chart. Deforms a gradient flow into Randers-Finsler form.
struct GaugeField {
  std::string name;
  Chart chart = Chart::Eta;
  VectorMap field;

  Vec eval(const Vec& x) const { return field.eval(x); }
  // jac(i,j) = d A_i / d x^j
  Mat jacobian(const Vec& x) const { return field.jacobian(x); }
};

// One of the two gradient flows of a dually-flat model, optionally deformed
// by a gauge field. direction = +1 is the canonical pair: ascent in the
// theta-chart, descent in the eta-chart; -1 reverses the clock.
//
// Specs and models are immutable; independent trajectories may be
// integrated in parallel, while each integration itself is sequential.
struct FlowSpec {
  DuallyFlatModel model;
  Chart chart = Chart::Eta;
  int direction = +1;
  std::optional<GaugeField> gauge;

  bool deformed() const { return gauge.has_value(); }
};

enum class Param { T, Lambda };

struct TrajectorySample {
  double t = 0;       // flow parameter
  double lambda = 0;  // rescaled parameter, d(lambda) = C^2 dt, lambda(0)=0
  Vec coords;         // state in the flow's chart
  Vec dual;           // pointwise dual coordinates of the state
  double conformal = 0;  // C at the state
  double phi = 0;        // constraint value at the flow's own momentum
  Mat products;          // K_i^j, empty for deformed flows
};

struct Trajectory {
  Chart chart = Chart::Eta;
  bool deformed = false;
  int direction = +1;
  Param param = Param::T;
  std::vector<TrajectorySample> samples;

  enum class Status { Completed, DomainExit };
  Status status = Status::Completed;
  int exit_step = -1;

  double step() const;  // uniform spacing of the active parameter axis
  double param_of(const TrajectorySample& s) const {
    return param == Param::T ? s.t : s.lambda;
  }
};

// Chart velocity of the flow at x.
//   theta-chart: dtheta/dt = dir * g^{ij}(theta) (dPsi/dtheta^j - A_j)
//   eta-chart:   deta/dt   = dir * ( -g*_ij(eta) (dPsi*/deta_j + A*^j) )
Vec flow_rhs(const FlowSpec& spec, const Point& x);

// Max-norm residual between the chart velocity pushed to the dual chart and
// the linear law (dir*(eta - A) for the theta flow, dir*(-theta - A*) for
// the eta flow).
double linear_rhs_check(const FlowSpec& spec, const Point& x);

// C with C^2 = g_ij xdot^i xdot^j in the flow's own chart (the deformed
// factor when a gauge is attached). Throws ConstraintError when C^2 <= 0.
double conformal_factor(const FlowSpec& spec, const Point& x);
double conformal_factor_sq(const FlowSpec& spec, const Point& x);

// The flow's own momentum at x: eta(x) - in the theta-chart, -theta(x) in
// the eta-chart (so that the gauge-covariant part is p - A in both charts).
Vec flow_momentum(const FlowSpec& spec, const Point& x);

// Classic fixed-step RK4. Records dual coordinates, C, Phi and (for
// undeformed flows) the conserved products K_i^j at every sample. Halts
// with a partial trajectory when the state leaves the domain box.
//
// K_i^j pairs the flow's own integrated dual track with the companion
// flow's closed-form exponential from the same initial point:
//   eta-chart flow:  K_i^j(t) = eta_i(0) e^{dir*t} * theta^j(t)
//   theta-chart flow: K_i^j(t) = eta_i(t) * theta^j(0) e^{-dir*t}
// so K(0) = eta_i(0) theta^j(0) and drift measures how exactly the flow
// reproduces its linear dual law.
Trajectory integrate(const FlowSpec& spec, const Point& x0, double t_end,
                     int steps);

// Max drift of each K_i^j over the trajectory. Rejects deformed flows:
// no conservation is claimed for them.
Mat conserved_products(const Trajectory& traj);

// Phi = sqrt(g^{ij} pi_i pi_j)/C with pi = p - A the gauge-covariant
// momentum; equals 1 at the flow's own momentum, homogeneous of degree one
// in pi. Throws ConstraintError on a negative radicand.
double constraint_value(const FlowSpec& spec, const Point& x, const Vec& p);

struct PhaseVelocity {
  Vec dx;  // dx^i/dlambda = dPhi/dp_i
  Vec dp;  // dp_i/dlambda = -dPhi/dx^i
};

// Direct phase-space partials of Phi (metric derivatives via third jets,
// gauge derivatives via the gauge Jacobian). Requires Phi(x,p) = 1 within
// 1e-8.
PhaseVelocity constraint_rhs(const FlowSpec& spec, const Point& x,
                             const Vec& p);

struct ConstraintSample {
  double lambda = 0;
  Vec x;
  Vec p;
  double phi = 0;
};

struct ConstraintTrajectory {
  std::vector<ConstraintSample> samples;
  double max_phi_drift = 0;  // max |phi - 1|
};

ConstraintTrajectory integrate_constraint(const FlowSpec& spec,
                                          const Point& x0, const Vec& p0,
                                          double lambda_end, int steps);

// Switches the active parameter axis between t and lambda. lambda is the
// cumulative trapezoid of C^2 over t, accumulated during integration, so
// the round trip is exact at the samples. Errors when lambda is not
// strictly increasing.
Trajectory reparametrize(const Trajectory& traj, Param target);

// Geodesic residuals along an integrated trajectory, on either the state
// track or the dual track. Requires >= 5 samples on a uniform active
// parameter axis (Trajectory::step() rejects non-uniform spacing).
enum class Track { Coords, Duals };
GeodesicResidual trajectory_geodesic_residual(const MetricField& g,
                                              const Trajectory& traj,
                                              Track track);

// Randers-Finsler line element of the (possibly deformed) flow geometry:
//   dt~ = sqrt(C^{-2} g_ij dx^i dx^j) + C^{-2} A_i dx^i
// in the flow's chart (starred analogue in the eta-chart); reduces to the
// Riemannian form when A = 0.
double rf_line_element(const FlowSpec& spec, const Point& x, const Vec& dx);

}  // namespace igflow
