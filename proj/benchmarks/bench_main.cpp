#include <benchmark/benchmark.h>

#include "igflow/flows.hpp"
#include "igflow/metric.hpp"
#include "igflow/models.hpp"

namespace {

using namespace igflow;

Point gaussian_eta_point(double mu, double sigma) {
  Vec eta(2);
  eta << mu, mu * mu + sigma * sigma;
  return Point{eta, "eta"};
}

void BM_Jet2Gaussian(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  Point p = gaussian_eta_point(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jet2(*g.model.psi_star, p));
  }
}
BENCHMARK(BM_Jet2Gaussian);

void BM_Jet3Gaussian(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  Point p = gaussian_eta_point(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jet3(*g.model.psi_star, p));
  }
}
BENCHMARK(BM_Jet3Gaussian);

void BM_FlowRhs(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
  Point p = gaussian_eta_point(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow_rhs(spec, p));
  }
}
BENCHMARK(BM_FlowRhs);

void BM_Integrate200(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
  Point p = gaussian_eta_point(1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(spec, p, 2.0, 200));
  }
}
BENCHMARK(BM_Integrate200);

void BM_ConstraintRhs(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, g.sigma_gauge};
  Point p = gaussian_eta_point(1, 1);
  Vec mom = flow_momentum(spec, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(constraint_rhs(spec, p, mom));
  }
}
BENCHMARK(BM_ConstraintRhs);

void BM_RicciRnRuppeiner(benchmark::State& state) {
  RnModel rn = rn_model();
  Point p = make_point({1.3, 0.4}, "(S,u)");
  for (auto _ : state) {
    benchmark::DoNotOptimize(ricci_scalar(rn.ruppeiner, p));
  }
}
BENCHMARK(BM_RicciRnRuppeiner);

void BM_RicciKerrMass(benchmark::State& state) {
  KerrModel k = kerr_model(KerrBranch::Outer);
  Point p = make_point({1.0, 0.1}, "(S,J)");
  for (auto _ : state) {
    benchmark::DoNotOptimize(ricci_scalar(k.mass_weinhold, p));
  }
}
BENCHMARK(BM_RicciKerrMass);

void BM_NewtonConjugate(benchmark::State& state) {
  GaussianModel g = gaussian_model();
  Vec target(2);
  target << 0.7, -0.4;
  Vec guess(2);
  guess << 0.5, 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        newton_invert_gradient(*g.model.psi_star, target, guess));
  }
}
BENCHMARK(BM_NewtonConjugate);

}  // namespace

BENCHMARK_MAIN();
