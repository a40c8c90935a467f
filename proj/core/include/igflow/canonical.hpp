#pragma once

#include <utility>

#include "igflow/dualflat.hpp"
#include "igflow/flows.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Image of a point under the generating map G = eta_i theta^i, which swaps
// the roles of the dual coordinates: theta_hat = eta, eta_hat = -theta.
// The mirrored potential pair satisfies xi + xi* = eta_hat . theta_hat.
struct CanonicalImage {
  Vec theta_hat;   // = eta(theta)
  Vec eta_hat;     // = -theta
  double xi = 0;       // = -Psi*(eta)
  double xi_star = 0;  // = -Psi(theta)
};

// The raw phase-space swap (q, p) -> (p, -q). Applying it twice is the
// point reflection (q, p) -> (-q, -p), an exact arithmetic identity.
inline std::pair<Vec, Vec> phase_swap(const Vec& q, const Vec& p) {
  return {p, -q};
}

CanonicalImage canonical_map(const DuallyFlatModel& m, const Point& theta);

// For a trajectory of the theta-chart ascent flow, the mapped coordinates
// theta_hat(t) = eta(t) must obey d theta_hat / dt* = -theta_hat with the
// reversed clock t* = -t. Returns the max finite-difference residual
// |d theta_hat/dt* + theta_hat| over interior samples.
double dual_flow_residual(const DuallyFlatModel& m, const Trajectory& traj);

// Checks d xi = d Psi - d G along 5 seeded random directions at theta,
// comparing a central difference of xi(theta_hat(theta)) against the
// analytic gradient of Psi - G. Returns the max absolute mismatch.
double generating_residual(const DuallyFlatModel& m, const Point& theta,
                           SplitMix64& rng);

}  // namespace igflow
