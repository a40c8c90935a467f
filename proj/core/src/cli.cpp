#include "igflow/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "igflow/flows.hpp"
#include "igflow/models.hpp"

namespace igflow {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct FlowSetup {
  DuallyFlatModel model;
  FlowSpec spec;
};

FlowSetup flow_from_config(const ExperimentConfig& config) {
  FlowSetup fsu;
  fsu.model = builtin_model(config.model);
  fsu.spec.model = fsu.model;
  fsu.spec.chart = config.chart == "theta" ? Chart::Theta : Chart::Eta;
  fsu.spec.direction = config.direction;
  fsu.spec.gauge = builtin_gauge(config.gauge, fsu.model, fsu.spec.chart);
  return fsu;
}

Vec display_of_sample(const DuallyFlatModel& model, Chart chart,
                      const TrajectorySample& s) {
  const Vec& eta = chart == Chart::Eta ? s.coords : s.dual;
  return model.to_display(eta);
}

Point chart_point_of_display(const DuallyFlatModel& model, Chart chart,
                             const Vec& display) {
  Vec eta = model.to_eta(display);
  if (chart == Chart::Eta) return Point{eta, "eta"};
  return theta_from_eta(model, Point{eta, "eta"});
}

}  // namespace

std::string trajectory_csv(const DuallyFlatModel& model,
                           const Trajectory& traj) {
  const int n = model.dim;
  std::ostringstream os;
  os << "t";
  for (const auto& nm : model.display_names) os << "," << nm;
  for (int i = 1; i <= n; ++i) os << ",eta" << i;
  for (int i = 1; i <= n; ++i) os << ",theta" << i;
  os << ",C,Phi";
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) os << ",K" << i << j;
  os << "\n";

  for (const auto& s : traj.samples) {
    const Vec& eta = traj.chart == Chart::Eta ? s.coords : s.dual;
    const Vec& theta = traj.chart == Chart::Eta ? s.dual : s.coords;
    os << format_double(traj.param_of(s));
    Vec disp = display_of_sample(model, traj.chart, s);
    for (int i = 0; i < disp.size(); ++i) os << "," << format_double(disp[i]);
    for (int i = 0; i < n; ++i) os << "," << format_double(eta[i]);
    for (int i = 0; i < n; ++i) os << "," << format_double(theta[i]);
    os << "," << format_double(s.conformal) << "," << format_double(s.phi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        os << ",";
        if (s.products.size() > 0) os << format_double(s.products(i, j));
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string trajectory_json(const DuallyFlatModel& model,
                            const Trajectory& traj) {
  nlohmann::json root;
  root["chart"] = chart_name(traj.chart);
  root["deformed"] = traj.deformed;
  root["status"] = traj.status == Trajectory::Status::Completed
                       ? "completed"
                       : "domain_exit";
  if (traj.status == Trajectory::Status::DomainExit) {
    root["exit_step"] = traj.exit_step;
  }
  auto arr = nlohmann::json::array();
  const int n = model.dim;
  for (const auto& s : traj.samples) {
    nlohmann::json e;
    e["t"] = format_double(s.t);
    e["lambda"] = format_double(s.lambda);
    Vec disp = display_of_sample(model, traj.chart, s);
    for (int i = 0; i < disp.size(); ++i) {
      e[model.display_names[i]] = format_double(disp[i]);
    }
    const Vec& eta = traj.chart == Chart::Eta ? s.coords : s.dual;
    const Vec& theta = traj.chart == Chart::Eta ? s.dual : s.coords;
    for (int i = 0; i < n; ++i) {
      e["eta" + std::to_string(i + 1)] = format_double(eta[i]);
      e["theta" + std::to_string(i + 1)] = format_double(theta[i]);
    }
    e["C"] = format_double(s.conformal);
    e["Phi"] = format_double(s.phi);
    if (s.products.size() > 0) {
      auto k = nlohmann::json::array();
      for (int i = 0; i < n; ++i) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < n; ++j) row.push_back(format_double(s.products(i, j)));
        k.push_back(row);
      }
      e["K"] = k;
    } else {
      e["K"] = nullptr;
    }
    arr.push_back(std::move(e));
  }
  root["samples"] = std::move(arr);
  return root.dump(2) + "\n";
}

int cmd_flow(const ExperimentConfig& config, std::ostream& diag) {
  validate_config(config);
  FlowSetup fsu = flow_from_config(config);

  std::vector<Vec> initials = config.sweep_points;
  if (initials.empty() && config.sweep_random == 0) {
    initials.push_back(fsu.model.sample_box.lo * 0.5 +
                       fsu.model.sample_box.hi * 0.5);
  }
  SplitMix64 rng(config.seed);
  for (int k = 0; k < config.sweep_random; ++k) {
    initials.push_back(fsu.model.sample_display(rng));
  }

  fs::create_directories(config.out_dir);
  std::ostringstream summary;
  summary << "model=" << config.model << " chart=" << config.chart
          << " gauge=" << config.gauge << " t_end=" << format_double(config.t_end)
          << " steps=" << resolved_steps(config) << " seed=" << config.seed << "\n";

  int warnings = 0;
  for (size_t k = 0; k < initials.size(); ++k) {
    if (initials[k].size() != fsu.model.dim) {
      throw ConfigError("sweep.point dimension mismatch for model '" +
                        config.model + "'");
    }
    Point x0 = chart_point_of_display(fsu.model, fsu.spec.chart, initials[k]);
    Trajectory traj = integrate(fsu.spec, x0, config.t_end, resolved_steps(config));

    char tag[32];
    std::snprintf(tag, sizeof(tag), "traj_%03zu", k);
    for (const auto& fmt : config.formats) {
      if (fmt == "csv") {
        write_file(fs::path(config.out_dir) / (std::string(tag) + ".csv"),
                   trajectory_csv(fsu.model, traj));
      } else {
        write_file(fs::path(config.out_dir) / (std::string(tag) + ".json"),
                   trajectory_json(fsu.model, traj));
      }
    }

    summary << tag << " start=[";
    for (int i = 0; i < initials[k].size(); ++i) {
      summary << (i ? " " : "") << format_double(initials[k][i]);
    }
    summary << "]";
    if (traj.status == Trajectory::Status::DomainExit) {
      summary << " WARNING: domain exit at step " << traj.exit_step;
      ++warnings;
    } else {
      double lin = 0;
      for (const auto& smp : traj.samples) {
        lin = std::max(lin, linear_rhs_check(
                                fsu.spec, Point{smp.coords,
                                                chart_name(fsu.spec.chart)}));
      }
      summary << " linear_law_residual=" << format_double(lin);
      if (!traj.deformed) {
        summary << " conservation_drift="
                << format_double(conserved_products(traj).maxCoeff());
      }
    }
    summary << "\n";
  }
  if (warnings) {
    summary << warnings << " trajectory(ies) exited the domain\n";
  }
  write_file(fs::path(config.out_dir) / "summary.txt", summary.str());
  diag << summary.str();
  return 0;
}

int cmd_curvature(const ExperimentConfig& config, std::ostream& diag) {
  validate_config(config);

  std::vector<NamedMetric> metrics;
  for (auto& nm : builtin_metrics()) {
    if (config.metric.empty() || nm.name == config.metric) {
      metrics.push_back(std::move(nm));
    }
  }
  if (metrics.empty()) {
    throw ConfigError("unknown metric '" + config.metric + "'");
  }

  fs::create_directories(config.out_dir);
  nlohmann::json jreport;
  jreport["metrics"] = nlohmann::json::array();
  std::ostringstream text;
  bool all_ok = true;

  for (const auto& nm : metrics) {
    Domain box = nm.grid_box.shrunk(config.grid_margin);
    const int n = config.grid_n;
    double max_abs_r = 0, max_dev = 0;
    int skipped = 0;
    std::ostringstream csv;
    csv << "x1,x2,ricci\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vec x(2);
        x << box.lo[0] + (box.hi[0] - box.lo[0]) * i / (n - 1.0),
            box.lo[1] + (box.hi[1] - box.lo[1]) * j / (n - 1.0);
        double r;
        try {
          r = ricci_scalar(nm.field, Point{x, "grid"});
        } catch (const SingularMetricError&) {
          ++skipped;
          continue;
        }
        max_abs_r = std::max(max_abs_r, std::abs(r));
        if (nm.expectation == NamedMetric::Expectation::Constant) {
          max_dev = std::max(max_dev, std::abs(r - nm.expected_value));
        } else if (nm.expectation == NamedMetric::Expectation::Curved &&
                   nm.expected_ricci) {
          double rel = std::abs(r - nm.expected_ricci(x)) /
                       std::max(1.0, std::abs(nm.expected_ricci(x)));
          max_dev = std::max(max_dev, rel);
        }
        csv << format_double(x[0]) << "," << format_double(x[1]) << ","
            << format_double(r) << "\n";
      }
    }
    write_file(fs::path(config.out_dir) / ("curvature_" + nm.name + ".csv"),
               csv.str());

    std::string status;
    bool ok = true;
    double flat_tol = config.tolerances.get("flatness_abs");
    switch (nm.expectation) {
      case NamedMetric::Expectation::Flat:
        ok = max_abs_r <= flat_tol;
        status = ok ? "pass" : "fail";
        break;
      case NamedMetric::Expectation::Constant:
        ok = max_dev <= config.tolerances.get("gaussian_ricci_abs");
        status = ok ? "curved (expected)" : "fail";
        break;
      case NamedMetric::Expectation::Curved:
        ok = !nm.expected_ricci || max_dev <= 1e-6;
        status = ok ? "curved (expected)" : "fail";
        break;
    }
    all_ok = all_ok && ok;

    nlohmann::json e;
    e["name"] = nm.name;
    e["status"] = status;
    e["max_abs_ricci"] = format_double(max_abs_r);
    e["max_deviation"] = format_double(max_dev);
    e["skipped_points"] = skipped;
    e["note"] = nm.note;
    jreport["metrics"].push_back(e);

    text << "[" << (ok ? "OK  " : "FAIL") << "] " << nm.name
         << " max|R|=" << format_double(max_abs_r);
    if (nm.expectation != NamedMetric::Expectation::Flat) {
      text << " max_dev=" << format_double(max_dev);
    }
    if (skipped) text << " skipped=" << skipped;
    text << " (" << status << "; " << nm.note << ")\n";
  }

  write_file(fs::path(config.out_dir) / "curvature_report.json",
             jreport.dump(2) + "\n");
  write_file(fs::path(config.out_dir) / "curvature_report.txt", text.str());
  diag << text.str();
  return all_ok ? 0 : 1;
}

int cmd_verify(const ExperimentConfig& config, std::ostream& diag) {
  validate_config(config);
  Report report = run_acceptance(config.tolerances, config.seed);
  fs::create_directories(config.out_dir);
  write_file(fs::path(config.out_dir) / "report.txt", report_text(report));
  write_file(fs::path(config.out_dir) / "report.json", report_json(report));
  diag << report_text(report);
  return report.all_passed() ? 0 : 1;
}

int cmd_report(const std::string& json_path, std::ostream& diag) {
  std::ifstream in(json_path);
  if (!in) throw ConfigError("cannot open report '" + json_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Report report = report_from_json(buf.str());
  diag << report_text(report);
  return report.all_passed() ? 0 : 1;
}

}  // namespace igflow
