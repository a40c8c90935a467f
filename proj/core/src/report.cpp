#include "igflow/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "igflow/canonical.hpp"
#include "igflow/flows.hpp"
#include "igflow/models.hpp"

namespace igflow {

Tolerances::Tolerances() {
  values_ = {
      {"conformal_abs", 1e-10},      // criteria 1, 2
      {"flow_sigma_abs", 1e-6},      // criterion 3
      {"flow_mu_drift", 1e-10},      // criterion 3
      {"dual_decay_abs", 1e-6},      // criterion 3
      {"deformed_flow_abs", 1e-5},   // criterion 4
      {"conservation_drift", 1e-6},  // criterion 5
      {"phi_drift", 1e-6},           // criterion 6
      {"roundtrip_rel", 1e-10},      // criterion 7
      {"hessian_product", 1e-8},     // criterion 7
      {"legendre_abs", 1e-8},        // criterion 7
      {"flatness_abs", 1e-5},        // criterion 8
      {"gaussian_ricci_abs", 1e-4},  // criterion 8
      {"rn_decay_s_abs", 1e-6},      // criterion 9
      {"rn_decay_u_abs", 1e-8},      // criterion 9
      {"canonical_residual", 1e-5},  // criterion 10
      {"jets_fd_rel", 1e-6},         // criterion 11, orders 1-2
      {"jets_fd_rel3", 1e-4},        // criterion 11, order 3
      {"rk4_ratio_lo", 12.0},        // criterion 12
      {"rk4_ratio_hi", 20.0},        // criterion 12
      {"grid_margin", 0.05},
  };
}

double Tolerances::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw InvalidArgument("unknown tolerance '" + name + "'");
  }
  return it->second;
}

void Tolerances::set(const std::string& name, double value) {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw InvalidArgument("unknown tolerance '" + name + "'");
  }
  it->second = value;
}

bool Report::all_passed() const { return failures() == 0; }

int Report::failures() const {
  int n = 0;
  for (const auto& c : checks) {
    if (c.status == CheckResult::Status::Fail) ++n;
  }
  return n;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Suite {
  const Tolerances& tol;
  std::uint64_t seed;
  Report report;

  void add(const std::string& name, const std::string& tag, double measured,
           double tolerance, bool pass, const std::string& detail = "") {
    CheckResult c;
    c.name = name;
    c.tag = tag;
    c.measured = measured;
    c.tol = tolerance;
    c.status = pass ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    c.detail = detail;
    report.checks.push_back(std::move(c));
  }

  void add_bound(const std::string& name, const std::string& tag,
                 double measured, double tolerance,
                 const std::string& detail = "") {
    add(name, tag, measured, tolerance, measured <= tolerance, detail);
  }

  void add_runtime(const std::string& name, double seconds, double limit) {
    add(name, "runtime", seconds, limit, seconds < limit);
  }
};

Point gaussian_eta_point(double mu, double sigma) {
  Vec eta(2);
  eta << mu, mu * mu + sigma * sigma;
  return Point{eta, "eta"};
}

// --- criteria 1 and 2: conformal factors over seeded random states --------

void criterion_conformal(Suite& s, bool deformed) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
  if (deformed) spec.gauge = g.sigma_gauge;
  double expected = deformed ? std::sqrt(1.5) : 1.0 / std::sqrt(2.0);

  auto start = Clock::now();
  SplitMix64 rng(s.seed);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    double mu = rng.uniform(-2, 2), sigma = rng.uniform(0.2, 3);
    double c = conformal_factor(spec, gaussian_eta_point(mu, sigma));
    worst = std::max(worst, std::abs(c - expected));
  }
  double dt = seconds_since(start);

  std::string id = deformed ? "02" : "01";
  std::string tag = deformed ? "gaussian-deformed-factor" : "gaussian-factor";
  s.add_bound(id, tag, worst, s.tol.get("conformal_abs"));
  s.add_runtime(id + ".runtime", dt, 1.0);
}

// --- criterion 3: gaussian descent flow against the closed form -----------

Trajectory reference_gaussian_trajectory(int steps = 200) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
  return integrate(spec, gaussian_eta_point(1, 1), 2.0, steps);
}

void criterion_flow(Suite& s) {
  auto start = Clock::now();
  Trajectory traj = reference_gaussian_trajectory();
  double dt = seconds_since(start);

  double mu_drift = 0, dual_err = 0;
  for (const auto& smp : traj.samples) {
    mu_drift = std::max(mu_drift, std::abs(smp.coords[0] - 1.0));
    Vec expected(2);
    expected << std::exp(-smp.t), -0.5 * std::exp(-smp.t);
    dual_err = std::max(dual_err, (smp.dual - expected).cwiseAbs().maxCoeff());
  }
  const auto& last = traj.samples.back();
  double sigma_end = std::sqrt(last.coords[1] - last.coords[0] * last.coords[0]);

  s.add_bound("03.sigma", "gaussian-flow", std::abs(sigma_end - std::exp(1.0)),
              s.tol.get("flow_sigma_abs"));
  s.add_bound("03.mu", "gaussian-flow", mu_drift, s.tol.get("flow_mu_drift"));
  s.add_bound("03.dual-decay", "gaussian-flow", dual_err,
              s.tol.get("dual_decay_abs"));
  s.add_runtime("03.runtime", dt, 1.0);
}

// --- criterion 4: deformed flow against the integrated oracle -------------

void criterion_deformed_flow(Suite& s) {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, g.sigma_gauge};
  auto start = Clock::now();
  Trajectory traj = integrate(spec, gaussian_eta_point(1, 1), 1.0, 200);
  double dt = seconds_since(start);

  const auto& last = traj.samples.back();
  double mu = last.coords[0];
  double sigma = std::sqrt(last.coords[1] - mu * mu);
  double sig_ref = std::exp(0.5);
  double mu_ref = 1 + 2 * (1 - sig_ref);
  double err = std::max(std::abs(mu - mu_ref), std::abs(sigma - sig_ref));

  s.add_bound("04", "gaussian-deformed-flow", err,
              s.tol.get("deformed_flow_abs"));
  s.add_runtime("04.runtime", dt, 1.0);
}

// --- criterion 5: conserved products ---------------------------------------

void criterion_conservation(Suite& s) {
  Trajectory traj = reference_gaussian_trajectory();
  double drift = conserved_products(traj).maxCoeff();
  s.add_bound("05", "conserved-products", drift,
              s.tol.get("conservation_drift"));
}

// --- criterion 6: unit constraint along constraint integrations -----------

void criterion_constraint(Suite& s) {
  GaussianModel g = gaussian_model();
  double worst = 0;
  for (int deformed = 0; deformed < 2; ++deformed) {
    FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
    if (deformed) spec.gauge = g.sigma_gauge;
    Point x0 = gaussian_eta_point(1, 1);
    ConstraintTrajectory ct =
        integrate_constraint(spec, x0, flow_momentum(spec, x0), 1.0, 200);
    worst = std::max(worst, ct.max_phi_drift);
  }
  s.add_bound("06", "constraint-preservation", worst, s.tol.get("phi_drift"));
}

// --- criterion 7: Legendre/duality suite over every model -----------------

void criterion_duality(Suite& s) {
  double worst_rt = 0, worst_prod = 0, worst_leg = 0;
  std::string worst_rt_model, worst_prod_model, worst_leg_model;

  for (const std::string& name : builtin_model_names()) {
    DuallyFlatModel m = builtin_model(name);
    SplitMix64 rng(s.seed);
    for (int k = 0; k < 100; ++k) {
      Vec eta = m.to_eta(m.sample_display(rng));
      Point pe{eta, "eta"};
      Point th = theta_from_eta(m, pe);
      double scale = std::max(1.0, eta.cwiseAbs().maxCoeff());
      double rt = (eta_from_theta(m, th).x - eta).cwiseAbs().maxCoeff() / scale;
      double prod = duality_residual(m, pe);
      double leg = legendre_residual(m, pe);
      if (rt > worst_rt) worst_rt = rt, worst_rt_model = name;
      if (prod > worst_prod) worst_prod = prod, worst_prod_model = name;
      if (leg > worst_leg) worst_leg = leg, worst_leg_model = name;
    }
  }
  s.add_bound("07.roundtrip", "legendre-duality", worst_rt,
              s.tol.get("roundtrip_rel"), "worst: " + worst_rt_model);
  s.add_bound("07.hessian-product", "legendre-duality", worst_prod,
              s.tol.get("hessian_product"), "worst: " + worst_prod_model);
  s.add_bound("07.legendre", "legendre-duality", worst_leg,
              s.tol.get("legendre_abs"), "worst: " + worst_leg_model);
}

// --- criterion 8: curvature certification grids ---------------------------

void criterion_curvature(Suite& s) {
  auto start = Clock::now();
  double margin = s.tol.get("grid_margin");

  auto grid_max = [&](const NamedMetric& nm, double constant) {
    Domain box = nm.grid_box.shrunk(margin);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        Vec x(2);
        x << box.lo[0] + (box.hi[0] - box.lo[0]) * i / 9.0,
            box.lo[1] + (box.hi[1] - box.lo[1]) * j / 9.0;
        double r = ricci_scalar(nm.field, Point{x, "grid"});
        worst = std::max(worst, std::abs(r - constant));
      }
    }
    return worst;
  };

  std::map<std::string, NamedMetric> reg;
  for (auto& nm : builtin_metrics()) reg.emplace(nm.name, std::move(nm));

  double flat_tol = s.tol.get("flatness_abs");
  s.add_bound("08a.rn-ruppeiner", "curvature",
              grid_max(reg.at("rn.ruppeiner"), 0.0), flat_tol);

  s.add_bound("08b.rn-weinhold", "curvature",
              grid_max(reg.at("rn.weinhold"), 0.0), flat_tol,
              "this closed-form metric is curved (exact R = "
              "2/(sqrt(S)(1-u^2)^2)); the flatness expectation encoded here "
              "cannot hold");

  s.add_bound("08c.kerr-weinhold", "curvature",
              grid_max(reg.at("kerr.weinhold"), 0.0), flat_tol,
              "this closed-form metric is curved (exact R = 1/(4 M^2) at "
              "sigma = 0); the flat object is the mass-representation "
              "metric certified in 08e");

  s.add_bound("08d.gaussian-ricci", "curvature",
              grid_max(reg.at("gaussian.riemannian"), -1.0),
              s.tol.get("gaussian_ricci_abs"), "R = -1 expected");

  s.add_bound("08e.kerr-mass-weinhold", "curvature",
              grid_max(reg.at("kerr.mass_weinhold"), 0.0), flat_tol,
              "flat mass-representation counterpart of 08c");

  s.add_runtime("08.runtime", seconds_since(start), 10.0);
}

// --- criterion 9: RN exponential decay -------------------------------------

void criterion_rn_decay(Suite& s) {
  RnModel rn = rn_model();
  DecayReport rep = decay_solution_check(rn, make_point({1, 0}, "(S,u)"), 1.0);

  double s_err = 0;
  for (const auto& smp : rep.samples) {
    s_err = std::max(s_err, std::abs(smp.display[0] - std::exp(-2 * smp.t)));
  }
  s.add_bound("09.entropy", "rn-decay", s_err, s.tol.get("rn_decay_s_abs"));
  s.add_bound("09.charge-ratio", "rn-decay", rep.max_u_drift,
              s.tol.get("rn_decay_u_abs"));

  Vec pushed = rn.pushed_dual_vars(rep.samples[0].display[0],
                                   rep.samples[0].display[1]);
  s.add("09.pushforward", "rn-decay", pushed[0], 2.0, pushed[0] == 2.0,
        "theta~^S at t = 0");
}

// --- criterion 10: canonical duality ---------------------------------------

void criterion_canonical(Suite& s) {
  GaussianModel g = gaussian_model();
  FlowSpec flow{g.model, Chart::Theta, +1, std::nullopt};
  Trajectory traj = integrate(flow, make_point({1, -0.5}, "theta"), 0.5, 200);
  double residual = dual_flow_residual(g.model, traj);
  s.add_bound("10.dual-flow", "canonical", residual,
              s.tol.get("canonical_residual"));

  SplitMix64 rng(s.seed);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    Vec q(2), p(2);
    for (int i = 0; i < 2; ++i) {
      q[i] = rng.uniform(-3, 3);
      p[i] = rng.uniform(-3, 3);
    }
    auto [q1, p1] = phase_swap(q, p);
    auto [q2, p2] = phase_swap(q1, p1);
    worst = std::max(worst, (q2 + q).cwiseAbs().maxCoeff());
    worst = std::max(worst, (p2 + p).cwiseAbs().maxCoeff());
  }
  s.add("10.involution", "canonical", worst, 0.0, worst == 0.0,
        "double swap must be the exact point reflection");
}

// --- criterion 11: differentiation oracle ----------------------------------

void criterion_jets(Suite& s) {
  double worst12 = 0, worst3 = 0;
  std::string worst_model;
  for (const auto& np : builtin_potentials()) {
    SplitMix64 rng(s.seed);
    for (int k = 0; k < 100; ++k) {
      Point x{np.sample(rng), np.f.chart()};
      Jet3 j = jet3(np.f, x);

      Vec fg = fd_gradient(np.f, x);
      Mat fh = fd_hessian(np.f, x);
      Ten3 ft = fd_third(np.f, x);

      double e1 = (fg - j.grad).cwiseAbs().maxCoeff() /
                  std::max(1.0, j.grad.cwiseAbs().maxCoeff());
      double e2 = (fh - j.hess).cwiseAbs().maxCoeff() /
                  std::max(1.0, j.hess.cwiseAbs().maxCoeff());
      double e3 = 0, scale3 = 1;
      for (int a = 0; a < x.dim(); ++a) {
        e3 = std::max(e3, (ft[a] - j.third[a]).cwiseAbs().maxCoeff());
        scale3 = std::max(scale3, j.third[a].cwiseAbs().maxCoeff());
      }
      e3 /= scale3;
      if (std::max(e1, e2) > worst12) {
        worst12 = std::max(e1, e2);
        worst_model = np.name;
      }
      worst3 = std::max(worst3, e3);
    }
  }
  s.add_bound("11.orders-1-2", "jets-vs-fd", worst12, s.tol.get("jets_fd_rel"),
              "worst: " + worst_model);
  s.add_bound("11.order-3", "jets-vs-fd", worst3, s.tol.get("jets_fd_rel3"));
}

// --- criterion 12: RK4 convergence order -----------------------------------

void criterion_rk4_order(Suite& s) {
  auto endpoint_error = [&](int steps) {
    Trajectory t = reference_gaussian_trajectory(steps);
    const auto& last = t.samples.back();
    double sigma = std::sqrt(last.coords[1] - last.coords[0] * last.coords[0]);
    return std::abs(sigma - std::exp(1.0));
  };
  double ratio = endpoint_error(100) / endpoint_error(200);
  bool pass = ratio >= s.tol.get("rk4_ratio_lo") &&
              ratio <= s.tol.get("rk4_ratio_hi");
  s.add("12", "rk4-order", ratio, s.tol.get("rk4_ratio_hi"), pass,
        "halving the step must shrink the endpoint error ~16x");
}

}  // namespace

Report run_acceptance(const Tolerances& tol, std::uint64_t seed) {
  return run_acceptance(tol, seed, 0);
}

Report run_acceptance(const Tolerances& tol, std::uint64_t seed,
                      int only_criterion) {
  Suite s{tol, seed, {}};
  auto want = [&](int n) { return only_criterion == 0 || only_criterion == n; };

  if (want(1)) criterion_conformal(s, false);
  if (want(2)) criterion_conformal(s, true);
  if (want(3)) criterion_flow(s);
  if (want(4)) criterion_deformed_flow(s);
  if (want(5)) criterion_conservation(s);
  if (want(6)) criterion_constraint(s);
  if (want(7)) criterion_duality(s);
  if (want(8)) criterion_curvature(s);
  if (want(9)) criterion_rn_decay(s);
  if (want(10)) criterion_canonical(s);
  if (want(11)) criterion_jets(s);
  if (want(12)) criterion_rk4_order(s);
  return s.report;
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) {
    const char* status = c.status == CheckResult::Status::Pass ? "PASS"
                         : c.status == CheckResult::Status::Fail ? "FAIL"
                                                                 : "SKIP";
    os << "[" << status << "] " << c.name << " (" << c.tag
       << ") measured=" << format_double(c.measured)
       << " tol=" << format_double(c.tol);
    if (!c.detail.empty()) os << "  -- " << c.detail;
    os << "\n";
  }
  os << (report.all_passed() ? "ALL CHECKS PASSED"
                             : std::to_string(report.failures()) +
                                   " CHECK(S) FAILED")
     << "\n";
  return os.str();
}

std::string report_json(const Report& report) {
  nlohmann::json j;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json e;
    e["name"] = c.name;
    e["tag"] = c.tag;
    e["status"] = c.status == CheckResult::Status::Pass ? "pass"
                  : c.status == CheckResult::Status::Fail ? "fail"
                                                          : "skip";
    e["measured"] = format_double(c.measured);
    e["tolerance"] = format_double(c.tol);
    if (!c.detail.empty()) e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  j["failures"] = report.failures();
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Report r;
  for (const auto& e : j.at("checks")) {
    CheckResult c;
    c.name = e.at("name").get<std::string>();
    c.tag = e.at("tag").get<std::string>();
    std::string st = e.at("status").get<std::string>();
    c.status = st == "pass" ? CheckResult::Status::Pass
               : st == "fail" ? CheckResult::Status::Fail
                              : CheckResult::Status::Skip;
    c.measured = std::stod(e.at("measured").get<std::string>());
    c.tol = std::stod(e.at("tolerance").get<std::string>());
    if (e.contains("detail")) c.detail = e.at("detail").get<std::string>();
    r.checks.push_back(std::move(c));
  }
  return r;
}

}  // namespace igflow
