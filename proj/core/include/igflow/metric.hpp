#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "igflow/jets.hpp"
#include "igflow/potential.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Position-dependent symmetric bilinear form, possibly indefinite. Nothing
// in the curvature path assumes positive definiteness; the black-hole
// metrics are Lorentzian.
class MetricField {
 public:
  enum class Provenance { HessianDerived, ClosedForm };

  MetricField() = default;

  // g_ij = Hessian of the potential; derivatives come from third and fourth
  // jets, exact to machine precision.
  static MetricField hessian_of(PotentialModel f);

  // Closed-form matrix with a scalar-generic evaluator: derivatives are
  // obtained by evaluating the same formula on dual numbers.
  // F: (const std::vector<T>& x) -> std::vector<T> of n*n row-major entries.
  template <typename F>
  static MetricField closed_form(std::string name, Domain domain, F entries) {
    MetricField m;
    m.impl_ = std::make_shared<ClosedImpl<F>>(std::move(name), std::move(domain),
                                              std::move(entries));
    return m;
  }

  // Closed-form matrix with only a plain-double evaluator; derivatives fall
  // back to central finite differences (first order in g: h = 1e-5 scaled,
  // five-point stencil; second order: h = 1e-3 scaled). Retained as the
  // cross-oracle for the dual-number path.
  static MetricField closed_form_fd(std::string name, Domain domain,
                                    std::function<Mat(const Vec&)> g);

  bool valid() const { return impl_ != nullptr; }
  const std::string& name() const;
  const Domain& domain() const;
  int dim() const;
  Provenance provenance() const;

  Mat eval(const Vec& x) const;
  // dg[k](i,j) = d g_ij / d x^k
  void derivatives(const Vec& x, Mat& g, Ten3& dg) const;
  // d2g[k][l](i,j) = d^2 g_ij / dx^k dx^l
  void derivatives2(const Vec& x, Mat& g, Ten3& dg, Ten4& d2g) const;

  // (positive, negative) eigenvalue counts.
  std::pair<int, int> signature_at(const Vec& x) const;

  struct Impl {
    std::string name;
    Domain domain;
    Provenance provenance;

    Impl(std::string n, Domain d, Provenance p)
        : name(std::move(n)), domain(std::move(d)), provenance(p) {}
    virtual ~Impl() = default;
    virtual Mat eval(const Vec& x) const = 0;
    virtual void derivatives(const Vec& x, Mat& g, Ten3& dg) const = 0;
    virtual void derivatives2(const Vec& x, Mat& g, Ten3& dg,
                              Ten4& d2g) const = 0;
  };

 private:
  struct ClosedBase : Impl {
    using Impl::Impl;
    virtual std::vector<double> ev0(const std::vector<double>&) const = 0;
    virtual std::vector<D1> ev1(const std::vector<D1>&) const = 0;
    virtual std::vector<D2> ev2(const std::vector<D2>&) const = 0;

    Mat eval(const Vec& x) const override;
    void derivatives(const Vec& x, Mat& g, Ten3& dg) const override;
    void derivatives2(const Vec& x, Mat& g, Ten3& dg, Ten4& d2g) const override;
  };

  template <typename F>
  struct ClosedImpl final : ClosedBase {
    F f;
    ClosedImpl(std::string n, Domain d, F fn)
        : ClosedBase(std::move(n), std::move(d), Provenance::ClosedForm),
          f(std::move(fn)) {}
    std::vector<double> ev0(const std::vector<double>& x) const override {
      return f(x);
    }
    std::vector<D1> ev1(const std::vector<D1>& x) const override {
      return f(x);
    }
    std::vector<D2> ev2(const std::vector<D2>& x) const override {
      return f(x);
    }
  };

  std::shared_ptr<const Impl> impl_;
};

struct CurvatureReport {
  Point point;
  Ten3 christoffel;      // [i](j,k) = Gamma^i_jk
  double ricci_scalar = 0;
  double tol = 1e-5;
  bool flat = false;     // |ricci_scalar| <= tol
  double condition = 0;  // condition number of g at the point
  bool near_degenerate = false;  // condition > 1e10
};

// Gamma^i_jk = (1/2) g^il (d_j g_lk + d_k g_jl - d_l g_jk).
Ten3 christoffel(const MetricField& g, const Point& x);

// R = g^jk R^i_jik with
// R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj
//         + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj.
double ricci_scalar(const MetricField& g, const Point& x);

CurvatureReport curvature_report(const MetricField& g, const Point& x,
                                 double tol = 1e-5);

struct GeodesicResidual {
  // max interior-sample norm of  xdd^i + Gamma^i_jk xd^j xd^k
  double affine = 0;
  // max interior-sample norm of  xdd^i + xd^i   (the non-affine-parameter
  // form the linear dual flows satisfy in a flat affine chart)
  double non_affine = 0;
};

// Velocities and accelerations along the curve come from central finite
// differences on the uniform parameter grid (fourth order in the interior).
// Requires >= 5 uniformly spaced samples.
GeodesicResidual geodesic_residual(const MetricField& g,
                                   const std::vector<Vec>& samples, double dt);

// Inverse through a fully pivoted LU; throws SingularMetricError when the
// matrix is numerically singular. `condition` (optional) receives the
// 2-norm condition number.
Mat invert_metric(const Mat& g, const std::string& who,
                  double* condition = nullptr);

}  // namespace igflow
