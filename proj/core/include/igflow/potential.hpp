#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "igflow/dual.hpp"
#include "igflow/types.hpp"

namespace igflow {

// A smooth scalar function of n coordinates plus metadata. The functor is
// generic over the scalar type so the same formula is evaluated on plain
// doubles and on nested duals up to depth four; that single definition is
// what makes machine-exact derivatives possible for arbitrary models.
//
// Immutable after construction; evaluation is pure and safe to call from
// concurrent workers.
class PotentialModel {
 public:
  PotentialModel() = default;

  template <typename F>
  PotentialModel(std::string name, Domain domain,
                 std::vector<std::string> coord_names, std::string chart, F f)
      : impl_(std::make_shared<Model<F>>(std::move(name), std::move(domain),
                                         std::move(coord_names),
                                         std::move(chart), std::move(f))) {}

  bool valid() const { return impl_ != nullptr; }
  const std::string& name() const { return impl_->name; }
  const std::string& chart() const { return impl_->chart; }
  const Domain& domain() const { return impl_->domain; }
  const std::vector<std::string>& coord_names() const {
    return impl_->coord_names;
  }
  int dim() const { return impl_->domain.dim(); }

  double value(const Vec& x) const {
    require_in_domain(domain(), x, name());
    std::vector<double> c(x.data(), x.data() + x.size());
    return impl_->eval0(c);
  }

  D1 eval(const std::vector<D1>& x) const { return impl_->eval1(x); }
  D2 eval(const std::vector<D2>& x) const { return impl_->eval2(x); }
  D3 eval(const std::vector<D3>& x) const { return impl_->eval3(x); }
  D4 eval(const std::vector<D4>& x) const { return impl_->eval4(x); }

 private:
  struct Concept {
    std::string name;
    Domain domain;
    std::vector<std::string> coord_names;
    std::string chart;

    Concept(std::string n, Domain d, std::vector<std::string> cn, std::string ch)
        : name(std::move(n)), domain(std::move(d)), coord_names(std::move(cn)),
          chart(std::move(ch)) {}
    virtual ~Concept() = default;
    virtual double eval0(const std::vector<double>&) const = 0;
    virtual D1 eval1(const std::vector<D1>&) const = 0;
    virtual D2 eval2(const std::vector<D2>&) const = 0;
    virtual D3 eval3(const std::vector<D3>&) const = 0;
    virtual D4 eval4(const std::vector<D4>&) const = 0;
  };

  template <typename F>
  struct Model final : Concept {
    F f;
    Model(std::string n, Domain d, std::vector<std::string> cn, std::string ch,
          F fn)
        : Concept(std::move(n), std::move(d), std::move(cn), std::move(ch)),
          f(std::move(fn)) {}
    double eval0(const std::vector<double>& x) const override { return f(x); }
    D1 eval1(const std::vector<D1>& x) const override { return f(x); }
    D2 eval2(const std::vector<D2>& x) const override { return f(x); }
    D3 eval3(const std::vector<D3>& x) const override { return f(x); }
    D4 eval4(const std::vector<D4>& x) const override { return f(x); }
  };

  std::shared_ptr<const Concept> impl_;
};

}  // namespace igflow
