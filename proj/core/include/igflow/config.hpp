#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igflow/report.hpp"
#include "igflow/types.hpp"

namespace igflow {

// Parsed experiment description. The file format is plain text, one dotted
// key per line, '#' comments:
//
//   model.name   = gaussian
//   flow.chart   = eta           # eta | theta
//   flow.gauge   = none          # none | sigma_inverse
//   flow.t_end   = 2.0
//   flow.steps   = 200           # omit for the default, 200 per unit t
//   flow.direction = 1
//   sweep.point  = 1 1           # display coordinates; repeatable
//   sweep.random = 0             # extra seeded random initial points
//   metric.name  = rn.ruppeiner  # curvature target; empty = all built-ins
//   grid.n       = 10
//   grid.margin  = 0.05
//   output.dir   = out
//   output.format = csv          # csv | json; repeatable
//   seed         = 42
//   tol.<name>   = <value>       # override a named tolerance
struct ExperimentConfig {
  std::string model = "gaussian";
  std::string chart = "eta";
  std::string gauge = "none";
  double t_end = 2.0;
  int steps = 0;  // 0 = default: 200 per unit of the flow parameter
  int direction = 1;
  std::vector<Vec> sweep_points;
  int sweep_random = 0;
  std::string metric;  // empty = every registered metric
  int grid_n = 10;
  double grid_margin = 0.05;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv"};
  std::uint64_t seed = 42;
  Tolerances tolerances;
};

// Both throw ConfigError with the offending line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Validation shared by the CLI entry points (model/gauge existence, step
// and parameter bounds). Throws ConfigError.
void validate_config(const ExperimentConfig& config);

// Explicit step count, or the 200-per-unit-parameter default.
int resolved_steps(const ExperimentConfig& config);

}  // namespace igflow
