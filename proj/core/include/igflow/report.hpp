#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace igflow {

// Tolerance table: every threshold the verification suite uses, keyed by
// name so configs and --tol flags can override them.
class Tolerances {
 public:
  Tolerances();

  double get(const std::string& name) const;
  void set(const std::string& name, double value);  // unknown name throws
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

struct CheckResult {
  std::string name;    // e.g. "03.flow.sigma"
  std::string tag;     // stable check-family id, e.g. "gaussian-flow"
  enum class Status { Pass, Fail, Skip } status = Status::Skip;
  double measured = 0;
  double tol = 0;
  std::string detail;  // shown for failures and informational lines
};

struct Report {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  int failures() const;
};

// Runs the complete verification suite (the twelve numbered criteria, with
// lettered sub-checks where a criterion bundles several measurements).
// Deterministic for a fixed seed.
Report run_acceptance(const Tolerances& tol, std::uint64_t seed);

// Restricts the run to one numbered criterion (1-12); 0 runs everything.
Report run_acceptance(const Tolerances& tol, std::uint64_t seed,
                      int only_criterion);

std::string report_text(const Report& report);
std::string report_json(const Report& report);
Report report_from_json(const std::string& json_text);

// 17-significant-digit formatting used by every serialized number.
std::string format_double(double value);

}  // namespace igflow
