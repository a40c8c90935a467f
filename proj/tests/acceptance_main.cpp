// Acceptance gate: runs the numbered verification criteria and prints one
// pass/fail line per check. Exit code 0 only if every check passed.
//
// Usage: acceptance [--only N] [--seed S] [--tol name=value]...

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "igflow/report.hpp"

int main(int argc, char** argv) {
  igflow::Tolerances tol;
  std::uint64_t seed = 42;
  int only = 0;

  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value after " << arg << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--only") {
      only = std::atoi(next().c_str());
    } else if (arg == "--seed") {
      seed = std::strtoull(next().c_str(), nullptr, 10);
    } else if (arg == "--tol") {
      std::string spec = next();
      size_t eq = spec.find('=');
      if (eq == std::string::npos) {
        std::cerr << "--tol expects name=value\n";
        return 2;
      }
      tol.set(spec.substr(0, eq), std::stod(spec.substr(eq + 1)));
    } else {
      std::cerr << "unknown argument " << arg << "\n";
      return 2;
    }
  }

  igflow::Report report = igflow::run_acceptance(tol, seed, only);
  std::cout << igflow::report_text(report);
  return report.all_passed() ? 0 : 1;
}
