#pragma once

#include <iosfwd>
#include <string>

#include "igflow/config.hpp"
#include "igflow/flows.hpp"

namespace igflow {

// Exit codes shared by every subcommand:
//   0 success, 1 check failure, 2 configuration error.
// ConfigError is mapped to 2 by the binary; these functions return 0/1.

// Integrates one trajectory per initial point (explicit sweep points plus
// seeded random ones), writes them in the requested formats and a summary
// of conservation drifts and linear-law residuals. Domain exits are
// recorded as warnings, not failures.
int cmd_flow(const ExperimentConfig& config, std::ostream& diag);

// Samples the Ricci scalar of the selected metric(s) on a grid over the
// margin-shrunk domain box and reports flatness/expected-curvature status.
int cmd_curvature(const ExperimentConfig& config, std::ostream& diag);

// Runs the full verification suite and writes the report (text and JSON).
int cmd_verify(const ExperimentConfig& config, std::ostream& diag);

// Renders a previously written report JSON back to the table form.
int cmd_report(const std::string& json_path, std::ostream& diag);

// Trajectory serialization (exposed for tests).
std::string trajectory_csv(const DuallyFlatModel& model,
                           const Trajectory& traj);
std::string trajectory_json(const DuallyFlatModel& model,
                            const Trajectory& traj);

}  // namespace igflow
