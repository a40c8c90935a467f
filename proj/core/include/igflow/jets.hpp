#pragma once

#include "igflow/potential.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Value, gradient and Hessian of a scalar at a point. The Hessian is
// symmetric by construction: only the upper triangle is computed.
struct Jet2 {
  double value = 0;
  Vec grad;
  Mat hess;
};

// Jet2 plus the fully symmetric third-derivative array third[k](i,j).
struct Jet3 {
  double value = 0;
  Vec grad;
  Mat hess;
  Ten3 third;
};

Jet2 jet2(const PotentialModel& f, const Point& x);
Jet3 jet3(const PotentialModel& f, const Point& x);

// Fourth derivatives fourth[k][l](i,j), fully symmetric. Feeds curvature of
// Hessian-derived metrics; not part of the public differentiation contract.
Ten4 jet4(const PotentialModel& f, const Point& x);

// Independent cross-check path. Order 1 is a central difference of function
// values; orders 2 and 3 are central differences of the exact jet of the
// next-lower order (pure value differences at h = 1e-5 drown in roundoff at
// those orders). Step h = 1e-5 * max(1, |x_k|) per axis; the probe points
// must sit at least 2h inside the domain.
Vec fd_gradient(const PotentialModel& f, const Point& x);
Mat fd_hessian(const PotentialModel& f, const Point& x);
Ten3 fd_third(const PotentialModel& f, const Point& x);

}  // namespace igflow
