#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "igflow/dualflat.hpp"
#include "igflow/flows.hpp"
#include "igflow/metric.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Scalar-generic function of one variable (the profile f(sigma) of the flat
// potential family), evaluable on nested duals for exact f', f''.
class ScalarFunc {
 public:
  ScalarFunc() = default;

  template <typename F>
  ScalarFunc(std::string name, F f)
      : impl_(std::make_shared<Model<F>>(std::move(name), std::move(f))) {}

  const std::string& name() const { return impl_->name; }
  double operator()(double x) const { return impl_->e0(x); }
  D1 operator()(const D1& x) const { return impl_->e1(x); }
  D2 operator()(const D2& x) const { return impl_->e2(x); }
  D3 operator()(const D3& x) const { return impl_->e3(x); }
  D4 operator()(const D4& x) const { return impl_->e4(x); }

  // f, f', f'' at x.
  void derivatives2(double x, double& f, double& fp, double& fpp) const;

 private:
  struct Concept {
    std::string name;
    explicit Concept(std::string n) : name(std::move(n)) {}
    virtual ~Concept() = default;
    virtual double e0(double) const = 0;
    virtual D1 e1(const D1&) const = 0;
    virtual D2 e2(const D2&) const = 0;
    virtual D3 e3(const D3&) const = 0;
    virtual D4 e4(const D4&) const = 0;
  };
  template <typename F>
  struct Model final : Concept {
    F f;
    Model(std::string n, F fn) : Concept(std::move(n)), f(std::move(fn)) {}
    double e0(double x) const override { return f(x); }
    D1 e1(const D1& x) const override { return f(x); }
    D2 e2(const D2& x) const override { return f(x); }
    D3 e3(const D3& x) const override { return f(x); }
    D4 e4(const D4& x) const override { return f(x); }
  };
  std::shared_ptr<const Concept> impl_;
};

// ---------------------------------------------------------------------------
// Reference models
// ---------------------------------------------------------------------------

// psi = |theta|^2 / 2, self-dual: eta = theta, unit metric.
DuallyFlatModel quadratic_model(int n = 2);

struct GaussianModel {
  DuallyFlatModel model;
  GaugeField sigma_gauge;   // A* = (1/sigma, 0) in the eta-chart
  MetricField riemannian;   // (d mu^2 + 2 d sigma^2)/sigma^2 in (mu, sigma)

  // Closed-form reference matrices in (mu, sigma), used as oracles against
  // the jet-derived ones.
  static Mat metric_upper(double mu, double sigma);   // g*^{ij} = Hess psi*
  static Mat metric_lower(double mu, double sigma);   // its inverse
  // d g*_ij / d eta_k of the lower matrix, k = 0, 1.
  static Mat metric_lower_deriv(double mu, double sigma, int k);
};

GaussianModel gaussian_model();

// ---------------------------------------------------------------------------
// Flat potential family  psi(x, y) = x^a f(sigma), sigma = x^b y
// ---------------------------------------------------------------------------

struct FlatFamilySpec {
  double a = 2;
  double b = -1;
  ScalarFunc f;
  std::string name = "flat-family";
  Domain xy_domain = Domain::box({{1e-3, 1e6}, {-1e6, 1e6}});
};

enum class FamilyForm { General, Weinhold, Ruppeiner };

// The family potential as a model (chart "(x,y)").
PotentialModel flat_family_potential(const FlatFamilySpec& spec);

// General form: the Hessian of psi in (x, y).
// Weinhold form (requires b = -a): variables (x, sigma),
//   ds^2 = x^{a-2} [ a(a-1)(f - sigma f') dx^2 + x^2 f'' dsigma^2 ].
// Ruppeiner form (requires b = -1): variables (psi, sigma),
//   ds^2 = (a-1)/(a psi) dpsi^2
//        + psi (f''/f - (a-1)/a (f'/f)^2) dsigma^2.
Mat flat_family_metric(const FlatFamilySpec& spec, const Point& x,
                       FamilyForm form);

// (theta^x, theta^y) = (x^{a-1}(a f + b sigma f'), x^{a+b} f').
Vec flat_family_dual_vars(const FlatFamilySpec& spec, const Vec& xy);

// The same forms as position-dependent metric fields (for curvature work).
// `box` is the validity region in the form's own coordinates.
MetricField flat_family_metric_field(const FlatFamilySpec& spec,
                                     FamilyForm form, Domain box);

// theta~^a = (d eta_i / d eta~_a) theta^i  (transpose-Jacobian action).
Vec pushforward_dual_vars(const Mat& jacobian, const Vec& theta);

// ---------------------------------------------------------------------------
// Kerr black hole (D = 4)
// ---------------------------------------------------------------------------

enum class KerrBranch { Outer = +1, Inner = -1 };

struct KerrModel {
  KerrBranch branch = KerrBranch::Outer;
  DuallyFlatModel model;  // eta = (M, J), psi* = S(M, J)

  // Entropy-potential metric in (M, sigma) coordinates,
  //   diag( 4(1 +- 1/w), -+ 2 M^2 / w^3 ),  w = sqrt(1 - sigma^2).
  // Indefinite; this is the object the dual coordinates and decay solutions
  // live on. Curved: R = 1/(4 M^2) at sigma = 0 on the outer branch.
  MetricField weinhold;

  // Hessian of M(S, J) over (S, J): the mass-representation metric, which
  // is genuinely flat (R = 0).
  MetricField mass_weinhold;

  // theta(M, sigma) closed form (gradient of S in the (M, J) chart,
  // expressed through the display variables).
  VectorMap theta_of_display;

  double mass(double S, double J) const;      // M = sqrt(S + 4 J^2/S)/2
  double entropy(double M, double J) const;   // S = 2 M^2 (1 +- w)
  // d(M,J)/d(M,sigma) at the given display point.
  Mat variable_map_jacobian(double M, double sigma) const;
};

KerrModel kerr_model(KerrBranch branch = KerrBranch::Outer);

// ---------------------------------------------------------------------------
// Reissner-Nordstrom black hole
// ---------------------------------------------------------------------------

struct RnModel {
  DuallyFlatModel model;  // eta = (M, Q), psi* = S(M, Q)

  // In (S, u) coordinates, u = Q/sqrt(S):
  //   weinhold:  (1/(8 S^{3/2})) [ -(1-u^2) dS^2 + 8 S^2 du^2 ]
  //   ruppeiner: -dS^2/(2S) + 4S/(1-u^2) du^2  (= weinhold / T, flat)
  MetricField weinhold;
  MetricField ruppeiner;

  VectorMap theta_of_display;  // (theta^M, theta^Q)(S, u)

  double entropy(double M, double Q) const;  // S = (M + sqrt(M^2 - Q^2))^2
  double mass(double S, double u) const;     // M = sqrt(S)(1 + u^2)/2
  double temperature(double S, double u) const;  // (1 - u^2)/(4 sqrt(S))
  // d(M,Q)/d(S,u) at the given display point.
  Mat variable_map_jacobian(double S, double u) const;
  // (theta~^S, theta~^u) via the transpose-Jacobian pushforward.
  Vec pushed_dual_vars(double S, double u) const;
};

RnModel rn_model();

// ---------------------------------------------------------------------------
// Exponential-decay solutions theta^i(t) = theta^i(0) e^{-t}
// ---------------------------------------------------------------------------

struct DecaySample {
  double t = 0;
  Vec display;   // solved state in display coordinates
  Vec theta;     // dual variables at the state
  double residual = 0;
};

struct DecayReport {
  std::vector<DecaySample> samples;
  double max_residual = 0;
  // RN only: max |u(t) - u(0)| (the ratio -theta^Q/theta^M is invariant).
  double max_u_drift = 0;
  // RN: max deviation of the solved S(t) from ((C^2-D^2)/(4C))^2 e^{-2t}.
  double closed_form_dev = 0;
  // Kerr: the printed closed-form (sigma, M) evaluated at t_end, reported
  // for comparison only; it is inconsistent with |sigma| < 1 and is not
  // used as ground truth.
  std::optional<Vec> reference_formula_end;
  bool domain_exit = false;
  double exit_time = 0;
};

// Solves theta(x(t)) = theta(x0) e^{-t} at `samples` time points by damped
// Newton in display coordinates, each started from the previous solution.
DecayReport decay_solution_check(const KerrModel& kerr, const Point& x0,
                                 double t_end, int samples = 50);
DecayReport decay_solution_check(const RnModel& rn, const Point& x0,
                                 double t_end, int samples = 50);

// ---------------------------------------------------------------------------
// Registries (drive the verification suite and the CLI)
// ---------------------------------------------------------------------------

struct NamedPotential {
  std::string name;
  PotentialModel f;
  std::function<Vec(SplitMix64&)> sample;  // random domain point, chart coords
};

std::vector<NamedPotential> builtin_potentials();

struct NamedMetric {
  std::string name;
  MetricField field;
  Domain grid_box;  // finite box for curvature grids (before margin shrink)
  enum class Expectation { Flat, Constant, Curved } expectation;
  double expected_value = 0;  // for Expectation::Constant
  // closed-form R(x) when known, as a cross-check for Curved entries
  std::function<double(const Vec&)> expected_ricci;
  std::string note;
};

std::vector<NamedMetric> builtin_metrics();

DuallyFlatModel builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

// The one non-trivial built-in gauge field, by name ("none" | "sigma_inverse").
std::optional<GaugeField> builtin_gauge(const std::string& name,
                                        const DuallyFlatModel& model,
                                        Chart chart);

}  // namespace igflow
