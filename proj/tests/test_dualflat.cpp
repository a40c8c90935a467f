#include <doctest.h>

#include <cmath>

#include "igflow/dualflat.hpp"
#include "igflow/models.hpp"

using namespace igflow;

TEST_CASE("dual coordinate maps: quadratic and gaussian") {
  DuallyFlatModel q = quadratic_model(2);
  Point th = make_point({1, 2}, "theta");
  CHECK((eta_from_theta(q, th).x - th.x).norm() == doctest::Approx(0.0));
  CHECK((theta_from_eta(q, make_point({1, 2}, "eta")).x - th.x).norm() ==
        doctest::Approx(0.0));

  GaussianModel g = gaussian_model();
  // (mu, sigma) = (0, 1): theta = (0, -1/2), eta = (0, 1)
  Vec eta = eta_from_theta(g.model, make_point({0, -0.5}, "theta")).x;
  CHECK(eta[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(eta[1] == doctest::Approx(1.0).epsilon(1e-14));
  // (mu, sigma) = (1, 1): theta = (1, -1/2), eta = (1, 2)
  eta = eta_from_theta(g.model, make_point({1, -0.5}, "theta")).x;
  CHECK(eta[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(eta[1] == doctest::Approx(2.0).epsilon(1e-13));

  Vec th2 = theta_from_eta(g.model, make_point({0, 1}, "eta")).x;
  CHECK(th2[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(th2[1] == doctest::Approx(-0.5).epsilon(1e-14));
  th2 = theta_from_eta(g.model, make_point({1, 2}, "eta")).x;
  CHECK(th2[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(th2[1] == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("metric_at returns the chart Hessian") {
  DuallyFlatModel q = quadratic_model(2);
  CHECK((metric_at(q, make_point({0.3, 0.7}, "theta")) - Mat::Identity(2, 2))
            .norm() < 1e-14);

  GaussianModel g = gaussian_model();
  Mat m01 = metric_at(g.model, make_point({0, 1}, "eta"));
  Mat expected(2, 2);
  expected << 1, 0, 0, 0.5;
  CHECK((m01 - expected).cwiseAbs().maxCoeff() < 1e-13);

  // (mu, sigma) = (1, 1): eta = (1, 2), metric (1/sigma^4)[[2mu^2+s^2, -mu],..]
  Mat m11 = metric_at(g.model, make_point({1, 2}, "eta"));
  expected << 3, -1, -1, 0.5;
  CHECK((m11 - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m11 - GaussianModel::metric_upper(1, 1)).cwiseAbs().maxCoeff() <
        1e-12);

  CHECK_THROWS_AS(metric_at(g.model, make_point({1, 1}, "nonsense")),
                  InvalidArgument);
}

TEST_CASE("closed-form inverse metric is the hand-verified oracle") {
  // sigma^2 [[1, 2 mu], [2 mu, 2(sigma^2 + 2 mu^2)]] times the chart Hessian
  // must be the identity.
  SplitMix64 rng(5);
  GaussianModel g = gaussian_model();
  for (int trial = 0; trial < 100; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.2, 3);
    Mat prod = GaussianModel::metric_lower(mu, sigma) *
               GaussianModel::metric_upper(mu, sigma);
    CHECK((prod - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    Vec eta = g.model.to_eta((Vec(2) << mu, sigma).finished());
    Mat hess = metric_at(g.model, Point{eta, "eta"});
    CHECK((hess - GaussianModel::metric_upper(mu, sigma)).cwiseAbs().maxCoeff() <
          1e-9 * hess.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("duality residual") {
  DuallyFlatModel q = quadratic_model(2);
  CHECK(duality_residual(q, make_point({1, 2}, "theta")) < 1e-15);

  GaussianModel g = gaussian_model();
  SplitMix64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.2, 3);
    Vec eta = g.model.to_eta((Vec(2) << mu, sigma).finished());
    CHECK(duality_residual(g.model, Point{eta, "eta"}) < 1e-8);
  }

  KerrModel k = kerr_model(KerrBranch::Outer);
  CHECK(duality_residual(k.model, make_point({1, 0.3}, "eta")) < 1e-6);
}

TEST_CASE("round trips, Legendre residual and metric duality per model") {
  SplitMix64 rng(42);
  for (const std::string& name : builtin_model_names()) {
    CAPTURE(name);
    DuallyFlatModel m = builtin_model(name);
    for (int trial = 0; trial < 100; ++trial) {
      Vec eta = m.to_eta(m.sample_display(rng));
      Point pe{eta, "eta"};
      Point th = theta_from_eta(m, pe);
      Vec back = eta_from_theta(m, th).x;
      double scale = std::max(1.0, eta.cwiseAbs().maxCoeff());
      CHECK((back - eta).cwiseAbs().maxCoeff() / scale < 1e-10);

      CHECK(legendre_residual(m, pe) < 1e-8);

      Mat g_theta = metric_at(m, th);
      Mat g_eta = metric_at(m, pe);
      CHECK((g_theta * g_eta - Mat::Identity(m.dim, m.dim))
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("numeric conjugate: damped Newton without closed maps") {
  GaussianModel g = gaussian_model();

  // strip the closed-form inverse route: only psi_star remains, so
  // eta_from_theta must solve grad psi*(eta) = theta
  DuallyFlatModel numeric;
  numeric.name = "gaussian-numeric";
  numeric.dim = 2;
  numeric.psi_star = g.model.psi_star;
  numeric.guess_eta_of_theta = [](const Vec&) {
    return (Vec(2) << 0.0, 1.0).finished();  // (mu, sigma) = (0, 1)
  };
  numeric.display_chart = g.model.display_chart;
  numeric.display_to_eta = g.model.display_to_eta;
  numeric.eta_to_display = g.model.eta_to_display;
  numeric.sample_box = Domain::box({{-1, 1}, {0.5, 2}});

  SplitMix64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    Vec eta = numeric.to_eta(numeric.sample_display(rng));
    Vec theta = theta_from_eta(numeric, Point{eta, "eta"}).x;
    Vec eta_back = eta_from_theta(numeric, Point{theta, "theta"}).x;
    CHECK((eta_back - eta).cwiseAbs().maxCoeff() /
              std::max(1.0, eta.cwiseAbs().maxCoeff()) <
          1e-10);
  }

  // a target outside the image of the gradient map cannot converge
  CHECK_THROWS_AS(
      eta_from_theta(numeric, make_point({0.0, 0.5}, "theta")),
      NewtonError);
  try {
    eta_from_theta(numeric, make_point({0.0, 0.5}, "theta"));
  } catch (const NewtonError& err) {
    CHECK(err.best_residual() > 0);
    CHECK(std::isfinite(err.best_residual()));
  }
}
