#include <doctest.h>

#include <cmath>

#include "igflow/flows.hpp"
#include "igflow/models.hpp"

using namespace igflow;

namespace {

FlowSpec gaussian_eta_flow(bool deformed) {
  GaussianModel g = gaussian_model();
  FlowSpec spec;
  spec.model = g.model;
  spec.chart = Chart::Eta;
  if (deformed) spec.gauge = g.sigma_gauge;
  return spec;
}

// (d mu/dt, d sigma/dt) from an eta-chart velocity at (mu, sigma).
Vec to_musigma_velocity(const Vec& v_eta, double mu, double sigma) {
  Vec v(2);
  v << v_eta[0], (v_eta[1] - 2 * mu * v_eta[0]) / (2 * sigma);
  return v;
}

Point gaussian_eta_point(double mu, double sigma) {
  Vec eta(2);
  eta << mu, mu * mu + sigma * sigma;
  return Point{eta, "eta"};
}

}  // namespace

TEST_CASE("flow_rhs reference values") {
  DuallyFlatModel q = quadratic_model(2);
  FlowSpec qflow{q, Chart::Theta, +1, std::nullopt};
  Vec v = flow_rhs(qflow, make_point({1, 0}, "theta"));
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.0));

  // gaussian descent flow at (mu, sigma) = (2, 1)
  FlowSpec gflow = gaussian_eta_flow(false);
  Vec ve = flow_rhs(gflow, gaussian_eta_point(2, 1));
  Vec vms = to_musigma_velocity(ve, 2, 1);
  CHECK(vms[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vms[1] == doctest::Approx(0.5).epsilon(1e-12));  // sigma/2

  // deformed by A* = (1/sigma, 0)
  FlowSpec dflow = gaussian_eta_flow(true);
  Vec vd = flow_rhs(dflow, gaussian_eta_point(2, 1));
  Vec vdms = to_musigma_velocity(vd, 2, 1);
  CHECK(vdms[0] == doctest::Approx(-1.0).epsilon(1e-12));  // -sigma
  CHECK(vdms[1] == doctest::Approx(0.5).epsilon(1e-12));   // sigma/2
}

TEST_CASE("chart and gauge guards") {
  FlowSpec gflow = gaussian_eta_flow(false);
  CHECK_THROWS_AS(flow_rhs(gflow, make_point({1, -0.5}, "theta")),
                  InvalidArgument);

  FlowSpec bad = gaussian_eta_flow(true);
  bad.chart = Chart::Theta;  // gauge lives in the eta-chart
  CHECK_THROWS_AS(flow_rhs(bad, make_point({1, -0.5}, "theta")),
                  InvalidArgument);
}

TEST_CASE("linear dual law") {
  DuallyFlatModel q = quadratic_model(2);
  FlowSpec qflow{q, Chart::Theta, +1, std::nullopt};
  CHECK(linear_rhs_check(qflow, make_point({1, 1}, "theta")) < 1e-14);

  FlowSpec gflow = gaussian_eta_flow(false);
  SplitMix64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.2, 3);
    CHECK(linear_rhs_check(gflow, gaussian_eta_point(mu, sigma)) < 1e-8);
  }

  // deformed law: d theta^1/dt* = -theta^1 - 1/sigma = -2 at (1, 1)
  FlowSpec dflow = gaussian_eta_flow(true);
  Point p = gaussian_eta_point(1, 1);
  CHECK(linear_rhs_check(dflow, p) < 1e-12);
  Vec pushed = metric_at(dflow.model, p) * flow_rhs(dflow, p);
  CHECK(pushed[0] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("conformal factor is constant for the gaussian flows") {
  FlowSpec gflow = gaussian_eta_flow(false);
  FlowSpec dflow = gaussian_eta_flow(true);
  SplitMix64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.2, 3);
    Point p = gaussian_eta_point(mu, sigma);
    CHECK(std::abs(conformal_factor(gflow, p) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(conformal_factor(dflow, p) - std::sqrt(1.5)) < 1e-12);
  }

  DuallyFlatModel q = quadratic_model(2);
  FlowSpec qflow{q, Chart::Theta, +1, std::nullopt};
  CHECK(conformal_factor(qflow, make_point({1, 0}, "theta")) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian descent flow: closed-form solution and dual decay") {
  FlowSpec gflow = gaussian_eta_flow(false);
  Trajectory traj = integrate(gflow, gaussian_eta_point(1, 1), 2.0, 200);
  REQUIRE(traj.status == Trajectory::Status::Completed);
  REQUIRE(traj.samples.size() == 201);

  // mu = eta_1 is a constant of motion; sigma(t) = e^{t/2}
  double mu_drift = 0, sigma_err = 0, dual_err = 0, linear_res = 0;
  for (const auto& s : traj.samples) {
    double mu = s.coords[0];
    double sigma = std::sqrt(s.coords[1] - mu * mu);
    mu_drift = std::max(mu_drift, std::abs(mu - 1.0));
    sigma_err = std::max(sigma_err, std::abs(sigma - std::exp(s.t / 2)));
    // theta^i(t) = theta^i(0) e^{-t}
    Vec expected(2);
    expected << std::exp(-s.t), -0.5 * std::exp(-s.t);
    dual_err = std::max(dual_err, (s.dual - expected).cwiseAbs().maxCoeff());
    linear_res = std::max(
        linear_res, linear_rhs_check(gflow, Point{s.coords, "eta"}));
  }
  CHECK(mu_drift < 1e-10);
  CHECK(std::abs(std::sqrt(traj.samples.back().coords[1] - 1.0) -
                 std::exp(1.0)) < 1e-6);
  CHECK(sigma_err < 1e-6);
  CHECK(dual_err < 1e-6);
  CHECK(linear_res < 1e-8);
}

TEST_CASE("deformed gaussian flow: analytic oracle") {
  // d mu/dt = -sigma, d sigma/dt = sigma/2 integrates to
  // sigma(t) = e^{t/2}, mu(t) = 1 + 2(1 - e^{t/2}) from (1, 1)
  FlowSpec dflow = gaussian_eta_flow(true);
  Trajectory traj = integrate(dflow, gaussian_eta_point(1, 1), 1.0, 200);
  REQUIRE(traj.status == Trajectory::Status::Completed);

  double worst = 0, linear_res = 0;
  for (const auto& s : traj.samples) {
    double mu = s.coords[0];
    double sigma = std::sqrt(s.coords[1] - mu * mu);
    double sig_ref = std::exp(s.t / 2);
    double mu_ref = 1 + 2 * (1 - sig_ref);
    worst = std::max(worst, std::abs(mu - mu_ref));
    worst = std::max(worst, std::abs(sigma - sig_ref));
    linear_res = std::max(linear_res,
                          linear_rhs_check(dflow, Point{s.coords, "eta"}));
  }
  CHECK(worst < 1e-5);
  CHECK(linear_res < 1e-8);
  CHECK(traj.samples.back().products.size() == 0);  // no K for deformed flows
}

TEST_CASE("dual track of the descent flow solves the non-affine geodesic law") {
  GaussianModel g = gaussian_model();
  FlowSpec gflow = gaussian_eta_flow(false);
  Trajectory traj = integrate(gflow, gaussian_eta_point(1, 1), 2.0, 200);
  // theta(t) = theta(0) e^{-t} satisfies xdd = -xd in the flat dual chart
  MetricField theta_metric = MetricField::hessian_of(*g.model.psi);
  GeodesicResidual r =
      trajectory_geodesic_residual(theta_metric, traj, Track::Duals);
  CHECK(r.non_affine < 1e-5);
}

TEST_CASE("direction reversal runs the flow backwards") {
  FlowSpec rev = gaussian_eta_flow(false);
  rev.direction = -1;
  Trajectory traj = integrate(rev, gaussian_eta_point(1, 1), 1.0, 100);
  REQUIRE(traj.status == Trajectory::Status::Completed);
  const auto& last = traj.samples.back();
  double sigma = std::sqrt(last.coords[1] - last.coords[0] * last.coords[0]);
  CHECK(sigma == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
  // the conserved-product pairing follows the reversed clock
  CHECK(conserved_products(traj).maxCoeff() < 1e-8);
}

TEST_CASE("RK4 convergence order") {
  FlowSpec gflow = gaussian_eta_flow(false);
  auto endpoint_error = [&](int steps) {
    Trajectory t = integrate(gflow, gaussian_eta_point(1, 1), 2.0, steps);
    double sigma =
        std::sqrt(t.samples.back().coords[1] - t.samples.back().coords[0] *
                                                   t.samples.back().coords[0]);
    return std::abs(sigma - std::exp(1.0));
  };
  double ratio = endpoint_error(100) / endpoint_error(200);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("integrator guards and domain exit") {
  FlowSpec gflow = gaussian_eta_flow(false);
  CHECK_THROWS_AS(integrate(gflow, gaussian_eta_point(1, 1), 1.0, 5),
                  InvalidArgument);

  // the theta-chart ascent flow from (1, 1) hits eta2 = eta1^2 at t = ln 2
  GaussianModel g = gaussian_model();
  FlowSpec ascent{g.model, Chart::Theta, +1, std::nullopt};
  Trajectory traj =
      integrate(ascent, make_point({1, -0.5}, "theta"), 2.0, 200);
  CHECK(traj.status == Trajectory::Status::DomainExit);
  CHECK(traj.exit_step > 0);
  double t_exit = traj.samples.back().t;
  CHECK(t_exit < std::log(2.0) + 0.05);
  CHECK(t_exit > std::log(2.0) - 0.1);
}

TEST_CASE("conserved products") {
  SUBCASE("quadratic ascent flow from (1,1)") {
    DuallyFlatModel q = quadratic_model(2);
    FlowSpec flow{q, Chart::Theta, +1, std::nullopt};
    Trajectory traj = integrate(flow, make_point({1, 1}, "theta"), 2.0, 200);
    Mat k0 = traj.samples.front().products;
    CHECK(k0(0, 0) == doctest::Approx(1.0));
    CHECK(conserved_products(traj).maxCoeff() < 1e-8);
  }

  SUBCASE("gaussian descent flow from (1,1)") {
    FlowSpec gflow = gaussian_eta_flow(false);
    Trajectory traj = integrate(gflow, gaussian_eta_point(1, 1), 2.0, 200);
    Mat k0 = traj.samples.front().products;
    // K_1^1(0) = eta_1(0) theta^1(0) = 1 * 1
    CHECK(k0(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(conserved_products(traj).maxCoeff() < 1e-6);
  }

  SUBCASE("deformed flows carry no conserved products") {
    FlowSpec dflow = gaussian_eta_flow(true);
    Trajectory traj = integrate(dflow, gaussian_eta_point(1, 1), 1.0, 50);
    CHECK_THROWS_AS(conserved_products(traj), InvalidArgument);
  }
}

TEST_CASE("constraint value") {
  FlowSpec gflow = gaussian_eta_flow(false);
  Point p = gaussian_eta_point(1, 1);
  Vec own = flow_momentum(gflow, p);
  CHECK(own[0] == doctest::Approx(-1.0).epsilon(1e-13));  // -theta
  CHECK(own[1] == doctest::Approx(0.5).epsilon(1e-13));

  CHECK(constraint_value(gflow, p, own) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(constraint_value(gflow, p, Vec(2 * own)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  FlowSpec dflow = gaussian_eta_flow(true);
  Vec dmom = flow_momentum(dflow, p);
  CHECK(constraint_value(dflow, p, dmom) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constraint homogeneity in the gauge-covariant momentum") {
  FlowSpec gflow = gaussian_eta_flow(false);
  FlowSpec dflow = gaussian_eta_flow(true);
  GaussianModel g = gaussian_model();
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.3, 3);
    Point p = gaussian_eta_point(mu, sigma);
    Vec pi(2);
    pi << rng.uniform(-2, 2), rng.uniform(-2, 2);
    double c = rng.uniform(0.1, 5.0);

    // undeformed: pi = p, exact degree-1 homogeneity
    double f1 = constraint_value(gflow, p, pi);
    double fc = constraint_value(gflow, p, Vec(c * pi));
    CHECK(fc == doctest::Approx(c * f1).epsilon(1e-12));

    // deformed: homogeneous in pi = p - A
    Vec a = g.sigma_gauge.eval(p.x);
    double d1 = constraint_value(dflow, p, Vec(a + pi));
    double dc = constraint_value(dflow, p, Vec(a + c * pi));
    CHECK(dc == doctest::Approx(c * d1).epsilon(1e-12));
  }
}

TEST_CASE("constraint equations: gaussian reference values") {
  FlowSpec gflow = gaussian_eta_flow(false);
  Point p = gaussian_eta_point(1, 1);
  PhaseVelocity v = constraint_rhs(gflow, p, flow_momentum(gflow, p));
  // d eta/d lambda* = (0, 2 sigma^2): d mu = 0, d sigma = sigma
  CHECK(v.dx[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.dx[1] == doctest::Approx(2.0).epsilon(1e-12));
  // on shell, dp/dlambda = theta/C^2 = 2 theta
  CHECK(v.dp[0] == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(v.dp[1] == doctest::Approx(-1.0).epsilon(1e-11));

  FlowSpec dflow = gaussian_eta_flow(true);
  PhaseVelocity vd = constraint_rhs(dflow, p, flow_momentum(dflow, p));
  CHECK(vd.dx[0] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

  // off-shell momenta are rejected
  Vec bad = 3 * flow_momentum(gflow, p);
  CHECK_THROWS_AS(constraint_rhs(gflow, p, bad), ConstraintError);
}

TEST_CASE("constraint equations: flat constant metric") {
  // For a constant metric with constant conformal factor the generator is
  // |p|/C: dx/dlambda = p/|p| at C = 1.
  DuallyFlatModel q = quadratic_model(2);
  FlowSpec flow{q, Chart::Theta, +1, std::nullopt};
  Point x = make_point({1, 0}, "theta");  // C(theta) = |theta| = 1 here
  Vec p(2);
  p << 1, 0;  // the flow's own momentum, |p| = 1
  PhaseVelocity v = constraint_rhs(flow, x, p);
  CHECK((v.dx - p).cwiseAbs().maxCoeff() < 1e-12);
  // C varies with theta for this model, so dp/dlambda follows the on-shell
  // law dp/dlambda = eta/C^2 rather than vanishing
  CHECK((v.dp - p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constraint-preserving integration") {
  SUBCASE("undeformed gaussian") {
    FlowSpec gflow = gaussian_eta_flow(false);
    Point x0 = gaussian_eta_point(1, 1);
    ConstraintTrajectory ct = integrate_constraint(
        gflow, x0, flow_momentum(gflow, x0), 1.0, 200);
    CHECK(ct.max_phi_drift < 1e-6);
    // d sigma/d lambda* = sigma: sigma(lambda) = e^lambda
    for (const auto& s : ct.samples) {
      double sigma = std::sqrt(s.x[1] - s.x[0] * s.x[0]);
      CHECK(std::abs(sigma - std::exp(s.lambda)) < 1e-6);
      CHECK(std::abs(s.x[0] - 1.0) < 1e-9);  // mu constant
    }
  }

  SUBCASE("deformed gaussian") {
    FlowSpec dflow = gaussian_eta_flow(true);
    Point x0 = gaussian_eta_point(1, 1);
    ConstraintTrajectory ct = integrate_constraint(
        dflow, x0, flow_momentum(dflow, x0), 1.0, 200);
    CHECK(ct.max_phi_drift < 1e-6);
    // d sigma/d lambda* = sigma/3
    for (const auto& s : ct.samples) {
      double sigma = std::sqrt(s.x[1] - s.x[0] * s.x[0]);
      CHECK(std::abs(sigma - std::exp(s.lambda / 3)) < 1e-6);
    }
  }

  SUBCASE("bad initial momentum rejected") {
    FlowSpec gflow = gaussian_eta_flow(false);
    Point x0 = gaussian_eta_point(1, 1);
    CHECK_THROWS_AS(
        integrate_constraint(gflow, x0, Vec(2 * flow_momentum(gflow, x0)),
                             1.0, 50),
        ConstraintError);
  }
}

TEST_CASE("reparametrization") {
  SUBCASE("gaussian: lambda = t/2 undeformed, 3t/2 deformed") {
    FlowSpec gflow = gaussian_eta_flow(false);
    Trajectory traj = integrate(gflow, gaussian_eta_point(1, 1), 2.0, 100);
    for (const auto& s : traj.samples) {
      CHECK(s.lambda == doctest::Approx(s.t / 2).epsilon(1e-12));
    }
    Trajectory lam = reparametrize(traj, Param::Lambda);
    CHECK(lam.param_of(lam.samples.back()) ==
          doctest::Approx(1.0).epsilon(1e-12));
    Trajectory back = reparametrize(lam, Param::T);
    for (size_t k = 0; k < traj.samples.size(); ++k) {
      CHECK(back.param_of(back.samples[k]) ==
            doctest::Approx(traj.param_of(traj.samples[k])).epsilon(1e-14));
    }

    FlowSpec dflow = gaussian_eta_flow(true);
    Trajectory dtraj = integrate(dflow, gaussian_eta_point(1, 1), 1.0, 100);
    for (const auto& s : dtraj.samples) {
      CHECK(s.lambda == doctest::Approx(1.5 * s.t).epsilon(1e-12));
    }
  }

  SUBCASE("constant C = 1 gives the identity") {
    Trajectory t;
    t.chart = Chart::Eta;
    for (int k = 0; k <= 10; ++k) {
      TrajectorySample s;
      s.t = 0.1 * k;
      s.lambda = 0.1 * k;
      s.conformal = 1.0;
      s.coords = Vec::Zero(2);
      s.dual = Vec::Zero(2);
      t.samples.push_back(s);
    }
    Trajectory l = reparametrize(t, Param::Lambda);
    for (size_t k = 0; k < t.samples.size(); ++k) {
      CHECK(l.param_of(l.samples[k]) == t.param_of(t.samples[k]));
    }
  }

  SUBCASE("non-monotone lambda rejected") {
    Trajectory t;
    for (int k = 0; k <= 3; ++k) {
      TrajectorySample s;
      s.t = 0.1 * k;
      s.lambda = -0.1 * k;
      s.coords = Vec::Zero(2);
      s.dual = Vec::Zero(2);
      t.samples.push_back(s);
    }
    CHECK_THROWS_AS(reparametrize(t, Param::Lambda), ConstraintError);
  }
}

TEST_CASE("randers-finsler line element") {
  GaussianModel g = gaussian_model();
  FlowSpec gflow = gaussian_eta_flow(false);
  FlowSpec dflow = gaussian_eta_flow(true);

  SplitMix64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.3, 3);
    double dmu = rng.uniform(-0.1, 0.1), dsigma = rng.uniform(-0.1, 0.1);
    Point p = gaussian_eta_point(mu, sigma);
    Vec deta(2);
    deta << dmu, 2 * mu * dmu + 2 * sigma * dsigma;

    double riemann_part =
        std::sqrt((2 / (sigma * sigma)) * (dmu * dmu + 2 * dsigma * dsigma));
    CHECK(rf_line_element(gflow, p, deta) ==
          doctest::Approx(riemann_part).epsilon(1e-10));

    double deformed = std::sqrt((2.0 / (3 * sigma * sigma)) *
                                (dmu * dmu + 2 * dsigma * dsigma)) +
                      2 * dmu / (3 * sigma);
    CHECK(rf_line_element(dflow, p, deta) ==
          doctest::Approx(deformed).epsilon(1e-10));
  }

  CHECK(rf_line_element(gflow, gaussian_eta_point(1, 1), Vec(Vec::Zero(2))) ==
        doctest::Approx(0.0));
}
