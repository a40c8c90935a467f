#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "igflow/jets.hpp"
#include "igflow/potential.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Scalar-generic vector field (closed-form coordinate maps, gauge fields).
// Evaluable on plain doubles and on first-order duals for exact Jacobians.
class VectorMap {
 public:
  VectorMap() = default;

  template <typename F>
  VectorMap(std::string name, int dim_in, int dim_out, F f)
      : impl_(std::make_shared<Model<F>>(std::move(name), dim_in, dim_out,
                                         std::move(f))) {}

  bool valid() const { return impl_ != nullptr; }
  const std::string& name() const { return impl_->name; }
  int dim_in() const { return impl_->dim_in; }
  int dim_out() const { return impl_->dim_out; }

  Vec eval(const Vec& x) const {
    std::vector<double> c(x.data(), x.data() + x.size());
    std::vector<double> r = impl_->eval0(c);
    return Eigen::Map<const Vec>(r.data(), static_cast<int>(r.size()));
  }

  // J(i,j) = d out_i / d x_j, exact via duals.
  Mat jacobian(const Vec& x) const {
    const int n = static_cast<int>(x.size());
    Mat j(impl_->dim_out, n);
    for (int k = 0; k < n; ++k) {
      std::vector<D1> z(n);
      for (int m = 0; m < n; ++m) z[m] = D1{x[m], m == k ? 1.0 : 0.0};
      std::vector<D1> r = impl_->eval1(z);
      for (int i = 0; i < impl_->dim_out; ++i) j(i, k) = r[i].d;
    }
    return j;
  }

 private:
  struct Concept {
    std::string name;
    int dim_in, dim_out;
    Concept(std::string n, int di, int dout)
        : name(std::move(n)), dim_in(di), dim_out(dout) {}
    virtual ~Concept() = default;
    virtual std::vector<double> eval0(const std::vector<double>&) const = 0;
    virtual std::vector<D1> eval1(const std::vector<D1>&) const = 0;
  };
  template <typename F>
  struct Model final : Concept {
    F f;
    Model(std::string n, int di, int dout, F fn)
        : Concept(std::move(n), di, dout), f(std::move(fn)) {}
    std::vector<double> eval0(const std::vector<double>& x) const override {
      return f(x);
    }
    std::vector<D1> eval1(const std::vector<D1>& x) const override {
      return f(x);
    }
  };
  std::shared_ptr<const Concept> impl_;
};

// A dually-flat structure built from a potential pair. Either potential may
// be absent; coordinate maps then fall back to a damped Newton inversion of
// the available gradient map, started from the model's guess.
struct DuallyFlatModel {
  std::string name;
  int dim = 0;

  std::optional<PotentialModel> psi;       // theta-chart potential
  std::optional<PotentialModel> psi_star;  // eta-chart potential

  // Closed-form maps, when the model knows them (exact, scalar-generic).
  std::optional<VectorMap> eta_of_theta;
  std::optional<VectorMap> theta_of_eta;

  // Newton starting guesses for the numeric conjugate.
  std::function<Vec(const Vec&)> guess_theta_of_eta;
  std::function<Vec(const Vec&)> guess_eta_of_theta;

  // Human-facing parametrization ("display" chart), e.g. (mu, sigma):
  // used for sampling, trajectory output and initial points.
  std::string display_chart;
  std::vector<std::string> display_names;
  std::function<Vec(const Vec&)> display_to_eta;  // identity if empty
  std::function<Vec(const Vec&)> eta_to_display;

  // Seeded sampling in the display chart, within the model's sweep box.
  Domain sample_box;  // in display coordinates
  Vec sample_display(SplitMix64& rng) const;

  Vec to_eta(const Vec& display) const {
    return display_to_eta ? display_to_eta(display) : display;
  }
  Vec to_display(const Vec& eta) const {
    return eta_to_display ? eta_to_display(eta) : eta;
  }

  const Domain& theta_domain() const;
  const Domain& eta_domain() const;
};

struct NewtonResult {
  Vec x;
  double residual = 0;
  int iterations = 0;
};

// Damped Newton with Armijo backtracking on |grad psi(theta) - eta|^2.
// Throws NewtonError (carrying the best residual) after 100 iterations.
NewtonResult newton_invert_gradient(const PotentialModel& f, const Vec& target,
                                    const Vec& initial_guess,
                                    double tol = 1e-13);

// eta_i = dPsi/dtheta^i (or the closed-form map / Newton fallback).
Point eta_from_theta(const DuallyFlatModel& m, const Point& theta);
// theta^i = dPsi*/deta_i (or the closed-form map / Newton fallback).
Point theta_from_eta(const DuallyFlatModel& m, const Point& eta);

// Hessian of the chart's potential: g_ij(theta) for the theta-chart,
// g*^ij(eta) (= inverse of g_ij at the corresponding point) for eta.
Mat metric_at(const DuallyFlatModel& m, const Point& x);

// |Hess Psi(theta) . Hess Psi*(eta(theta)) - I|_max at corresponding points.
double duality_residual(const DuallyFlatModel& m, const Point& x);

// |Psi(theta) + Psi*(eta) - eta.theta| at corresponding points. Requires
// both potentials.
double legendre_residual(const DuallyFlatModel& m, const Point& x);

}  // namespace igflow
