#include "igflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "igflow/models.hpp"

namespace igflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, int line) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

int parse_int(const std::string& v, int line) {
  double x = parse_number(v, line);
  int i = static_cast<int>(x);
  if (i != x) throw ConfigError("expected an integer, got '" + v + "'", line);
  return i;
}

Vec parse_point(const std::string& v, int line) {
  std::istringstream is(v);
  std::vector<double> vals;
  double x;
  while (is >> x) vals.push_back(x);
  if (!is.eof() || vals.empty()) {
    throw ConfigError("expected space-separated coordinates, got '" + v + "'",
                      line);
  }
  return Eigen::Map<const Vec>(vals.data(), static_cast<int>(vals.size()));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", line);
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("empty key or value", line);
    }

    if (key == "model.name") {
      cfg.model = value;
    } else if (key == "flow.chart") {
      cfg.chart = value;
    } else if (key == "flow.gauge") {
      cfg.gauge = value;
    } else if (key == "flow.t_end") {
      cfg.t_end = parse_number(value, line);
    } else if (key == "flow.steps") {
      cfg.steps = parse_int(value, line);
    } else if (key == "flow.direction") {
      cfg.direction = parse_int(value, line);
    } else if (key == "sweep.point") {
      cfg.sweep_points.push_back(parse_point(value, line));
    } else if (key == "sweep.random") {
      cfg.sweep_random = parse_int(value, line);
    } else if (key == "metric.name") {
      cfg.metric = value;
    } else if (key == "grid.n") {
      cfg.grid_n = parse_int(value, line);
    } else if (key == "grid.margin") {
      cfg.grid_margin = parse_number(value, line);
    } else if (key == "output.dir") {
      cfg.out_dir = value;
    } else if (key == "output.format") {
      cfg.formats.clear();
      std::istringstream fs(value);
      std::string f;
      while (fs >> f) cfg.formats.push_back(f);
    } else if (key == "seed") {
      double sd = parse_number(value, line);
      if (sd < 0) throw ConfigError("seed must be non-negative", line);
      cfg.seed = static_cast<std::uint64_t>(sd);
    } else if (key.rfind("tol.", 0) == 0) {
      try {
        cfg.tolerances.set(key.substr(4), parse_number(value, line));
      } catch (const InvalidArgument& err) {
        throw ConfigError(err.what(), line);
      }
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const ExperimentConfig& config) {
  auto names = builtin_model_names();
  if (std::find(names.begin(), names.end(), config.model) == names.end()) {
    throw ConfigError("unknown model '" + config.model + "'");
  }
  if (config.chart != "eta" && config.chart != "theta") {
    throw ConfigError("flow.chart must be 'eta' or 'theta'");
  }
  if (config.gauge != "none" && config.gauge != "sigma_inverse") {
    throw ConfigError("unknown gauge '" + config.gauge + "'");
  }
  if (config.steps != 0 && config.steps < 10) {
    throw ConfigError("flow.steps >= 10 required");
  }
  if (!(config.t_end > 0)) {
    throw ConfigError("flow.t_end must be positive");
  }
  if (config.direction != 1 && config.direction != -1) {
    throw ConfigError("flow.direction must be +1 or -1");
  }
  if (config.grid_n < 2) {
    throw ConfigError("grid.n >= 2 required");
  }
  if (!(config.grid_margin >= 0 && config.grid_margin < 0.5)) {
    throw ConfigError("grid.margin must lie in [0, 0.5)");
  }
  for (const auto& f : config.formats) {
    if (f != "csv" && f != "json") {
      throw ConfigError("output.format must be csv or json, got '" + f + "'");
    }
  }
}

int resolved_steps(const ExperimentConfig& config) {
  if (config.steps != 0) return config.steps;
  return std::max(10, static_cast<int>(std::lround(200 * config.t_end)));
}

}  // namespace igflow
