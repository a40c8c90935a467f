#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "igflow/cli.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::vector<std::string> tol_overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--format", flags.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--tol", flags.tol_overrides,
                  "tolerance override, name=value (repeatable)");
  cmd->add_option("--seed", flags.seed, "random seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
}

igflow::ExperimentConfig build_config(const CommonFlags& flags) {
  igflow::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = igflow::parse_config_file(flags.config_path);
  }
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.format.empty()) cfg.formats = {flags.format};
  if (flags.seed_set) cfg.seed = flags.seed;
  for (const auto& ov : flags.tol_overrides) {
    size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw igflow::ConfigError("--tol expects name=value, got '" + ov + "'");
    }
    cfg.tolerances.set(ov.substr(0, eq), std::stod(ov.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient flows, curvature and verification for dually-flat "
               "potential models"};
  app.require_subcommand(1);

  CommonFlags flow_flags, curv_flags, verify_flags;
  std::string report_path;

  CLI::App* flow = app.add_subcommand("flow", "integrate flow trajectories");
  attach_common(flow, flow_flags);

  CLI::App* curvature =
      app.add_subcommand("curvature", "Ricci-scalar grids for built-in metrics");
  attach_common(curvature, curv_flags);

  CLI::App* verify =
      app.add_subcommand("verify", "run the full verification suite");
  attach_common(verify, verify_flags);

  CLI::App* report =
      app.add_subcommand("report", "render a verification report JSON");
  report->add_option("json", report_path, "path to report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (flow->parsed()) {
      return igflow::cmd_flow(build_config(flow_flags), std::cout);
    }
    if (curvature->parsed()) {
      return igflow::cmd_curvature(build_config(curv_flags), std::cout);
    }
    if (verify->parsed()) {
      return igflow::cmd_verify(build_config(verify_flags), std::cout);
    }
    if (report->parsed()) {
      return igflow::cmd_report(report_path, std::cout);
    }
  } catch (const igflow::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
