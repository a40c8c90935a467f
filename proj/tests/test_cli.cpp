#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "igflow/cli.hpp"
#include "igflow/models.hpp"

using namespace igflow;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("igflow_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kGaussianConfig = R"(
# reference experiment
model.name  = gaussian
flow.chart  = eta
flow.gauge  = none
flow.t_end  = 2.0
flow.steps  = 200
sweep.point = 1 1
output.format = csv json
seed = 42
)";

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig cfg = parse_config_text(kGaussianConfig);
  CHECK(cfg.model == "gaussian");
  CHECK(cfg.chart == "eta");
  CHECK(cfg.t_end == 2.0);
  CHECK(cfg.steps == 200);
  REQUIRE(cfg.sweep_points.size() == 1);
  CHECK(cfg.sweep_points[0][0] == 1.0);
  CHECK(cfg.formats.size() == 2);
  CHECK(cfg.seed == 42);

  SUBCASE("unknown keys are rejected with the line number") {
    try {
      parse_config_text("model.name = gaussian\nbogus.key = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      CHECK(err.line() == 2);
      CHECK(std::string(err.what()).find("bogus.key") != std::string::npos);
    }
  }

  SUBCASE("validation: steps floor") {
    ExperimentConfig bad = parse_config_text("flow.steps = 5\n");
    CHECK_THROWS_WITH_AS(validate_config(bad),
                         doctest::Contains("steps >= 10"), ConfigError);
  }

  SUBCASE("validation: unknown model") {
    ExperimentConfig bad = parse_config_text("model.name = nonsense\n");
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
  }

  SUBCASE("tolerance overrides hit the named table") {
    ExperimentConfig cfg2 = parse_config_text("tol.jets_fd_rel = 1e-12\n");
    CHECK(cfg2.tolerances.get("jets_fd_rel") == 1e-12);
    CHECK_THROWS_AS(parse_config_text("tol.bogus = 1\n"), ConfigError);
  }
}

TEST_CASE("trajectory csv schema") {
  GaussianModel g = gaussian_model();
  FlowSpec spec{g.model, Chart::Eta, +1, std::nullopt};
  Vec eta0(2);
  eta0 << 1, 2;
  Trajectory traj = integrate(spec, Point{eta0, "eta"}, 1.0, 10);
  std::string csv = trajectory_csv(g.model, traj);

  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "t,mu,sigma,eta1,eta2,theta1,theta2,C,Phi,K11,K12,K21,K22");

  // deformed trajectories leave the K columns empty
  FlowSpec dspec{g.model, Chart::Eta, +1, g.sigma_gauge};
  Trajectory dtraj = integrate(dspec, Point{eta0, "eta"}, 1.0, 10);
  std::string dcsv = trajectory_csv(g.model, dtraj);
  std::istringstream ds(dcsv);
  std::string line;
  std::getline(ds, line);  // header
  std::getline(ds, line);  // first sample
  CHECK(line.substr(line.size() - 4) == ",,,,");
}

TEST_CASE("cmd_flow writes deterministic trajectories") {
  ExperimentConfig cfg = parse_config_text(kGaussianConfig);
  cfg.sweep_random = 2;

  fs::path a = fresh_dir("flow_a");
  fs::path b = fresh_dir("flow_b");
  std::ostringstream sink;

  cfg.out_dir = a.string();
  CHECK(cmd_flow(cfg, sink) == 0);
  cfg.out_dir = b.string();
  CHECK(cmd_flow(cfg, sink) == 0);

  for (const char* name :
       {"traj_000.csv", "traj_001.csv", "traj_002.csv", "summary.txt"}) {
    CAPTURE(name);
    CHECK(read_file(a / name) == read_file(b / name));
  }
  CHECK(fs::exists(a / "traj_000.json"));

  // first line of data: t = 0, mu = 1, sigma = 1
  std::istringstream is(read_file(a / "traj_000.csv"));
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(first.substr(0, 6) == "0,1,1,");
}

TEST_CASE("cmd_flow records domain exits as warnings") {
  ExperimentConfig cfg;
  cfg.model = "gaussian";
  cfg.chart = "theta";
  cfg.t_end = 2.0;
  cfg.steps = 100;
  cfg.sweep_points.push_back((Vec(2) << 1, 1).finished());  // display coords
  fs::path dir = fresh_dir("flow_exit");
  cfg.out_dir = dir.string();
  std::ostringstream sink;
  CHECK(cmd_flow(cfg, sink) == 0);  // exit status stays 0
  CHECK(read_file(dir / "summary.txt").find("WARNING: domain exit") !=
        std::string::npos);
}

TEST_CASE("cmd_curvature grids") {
  ExperimentConfig cfg;
  fs::path dir = fresh_dir("curv");
  cfg.out_dir = dir.string();
  std::ostringstream out;
  CHECK(cmd_curvature(cfg, out) == 0);  // every registered metric behaves

  std::string text = out.str();
  CHECK(text.find("rn.ruppeiner") != std::string::npos);
  CHECK(text.find("curved (expected)") != std::string::npos);
  CHECK(fs::exists(dir / "curvature_rn.ruppeiner.csv"));
  CHECK(fs::exists(dir / "curvature_report.json"));

  SUBCASE("single metric selection and unknown names") {
    cfg.metric = "gaussian.riemannian";
    CHECK(cmd_curvature(cfg, out) == 0);
    cfg.metric = "nonsense";
    CHECK_THROWS_AS(cmd_curvature(cfg, out), ConfigError);
  }
}

TEST_CASE("cmd_verify, report round trip and tolerance plumbing") {
  ExperimentConfig cfg;
  fs::path dir = fresh_dir("verify");
  cfg.out_dir = dir.string();
  std::ostringstream out;

  // two curvature sub-checks encode flatness expectations that the printed
  // closed-form metrics cannot satisfy; everything else must pass
  int rc = cmd_verify(cfg, out);
  CHECK(rc == 1);
  Report rep = report_from_json(read_file(dir / "report.json"));
  CHECK(rep.failures() == 2);
  for (const auto& c : rep.checks) {
    bool known_red = c.name == "08b.rn-weinhold" || c.name == "08c.kerr-weinhold";
    CHECK((c.status == CheckResult::Status::Fail) == known_red);
  }

  std::ostringstream rendered;
  CHECK(cmd_report((dir / "report.json").string(), rendered) == 1);
  CHECK(rendered.str() == read_file(dir / "report.txt"));

  SUBCASE("forced failure demonstrates the tolerance plumbing") {
    cfg.tolerances.set("jets_fd_rel", 1e-12);
    std::ostringstream sink;
    CHECK(cmd_verify(cfg, sink) == 1);
    Report forced = report_from_json(read_file(dir / "report.json"));
    bool jets_failed = false;
    for (const auto& c : forced.checks) {
      if (c.name == "11.orders-1-2") {
        jets_failed = c.status == CheckResult::Status::Fail;
      }
    }
    CHECK(jets_failed);
  }
}

TEST_CASE("numbers survive the 17-digit round trip") {
  SplitMix64 rng(99);
  for (int k = 0; k < 200; ++k) {
    double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
    CHECK(std::stod(format_double(x)) == x);
  }
}
