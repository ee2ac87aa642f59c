#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spherekde/bench.hpp"
#include "spherekde/errors.hpp"
#include "spherekde/estimator.hpp"
#include "spherekde/io.hpp"
#include "spherekde/kernel.hpp"
#include "spherekde/selectors.hpp"
#include "spherekde/targets.hpp"

namespace {

using nlohmann::ordered_json;
using namespace spherekde;

constexpr int kExitFailure = 1;
constexpr int kExitParse = 2;
constexpr int kExitRange = 3;
constexpr int kExitInsufficientData = 4;

ordered_json selection_report_to_json(const SelectionReport& report) {
  ordered_json j;
  j["schema"] = "spherekde-report/1";
  j["kind"] = "selection";
  j["method"] = method_name(report.method);
  if (report.method == SelectionMethod::Spco) j["lambda"] = report.lambda;
  j["kernel"] = report.grid.kernel_id;
  j["n"] = report.grid.n;
  j["d"] = report.grid.d;
  j["m_max"] = report.grid.m_max;
  j["h_min"] = report.grid.h_min();
  j["chosen_h"] = report.chosen_h;
  ordered_json table = ordered_json::array();
  for (const auto& row : report.table) {
    ordered_json rj;
    rj["h"] = row.h;
    rj["criterion"] = row.criterion;
    if (std::isfinite(row.penalty)) rj["penalty"] = row.penalty;
    if (std::isfinite(row.diff_sq_norm)) rj["diff_sq_norm"] = row.diff_sq_norm;
    if (std::isfinite(row.risk_shifted)) rj["risk_shifted"] = row.risk_shifted;
    table.push_back(std::move(rj));
  }
  j["table"] = std::move(table);
  return j;
}

int cmd_select(const std::string& input, const std::string& method,
               double lambda, const std::string& kernel_name,
               const std::string& output, bool spherical) {
  const KernelProfile kernel = kernel_by_name(kernel_name);
  Sample sample(read_points_csv(input, spherical));
  SelectionReport report;
  if (method == "spco") {
    report = spco_select(sample, kernel, lambda);
  } else if (method == "cv2") {
    report = cv2_select(sample, kernel);
  } else {
    throw ConfigError("--method must be 'spco' or 'cv2'");
  }
  if (!output.empty()) {
    atomic_write_file(output, selection_report_to_json(report).dump(2) + "\n");
  }
  std::cout << report.chosen_h << "\n";
  return 0;
}

int cmd_estimate(const std::string& input, const std::string& h_arg,
                 double lambda, const std::string& kernel_name,
                 const std::string& output, bool spherical, int mesh_theta,
                 int mesh_phi) {
  const KernelProfile kernel = kernel_by_name(kernel_name);
  Sample sample(read_points_csv(input, spherical));
  if (sample.dim() != 3) {
    throw std::domain_error("estimate: evaluation mesh requires S^2 input");
  }

  double h = 0.0;
  if (h_arg == "auto") {
    h = spco_select(sample, kernel, lambda).chosen_h;
  } else {
    try {
      std::size_t pos = 0;
      h = std::stod(h_arg, &pos);
      if (pos != h_arg.size()) throw std::invalid_argument(h_arg);
    } catch (...) {
      throw ConfigError("--h must be a number in (0, 1] or 'auto'");
    }
    if (!(h > 0.0) || h > 1.0) {
      throw std::domain_error("--h must lie in (0, 1]");
    }
  }

  FittedEstimator est(sample, kernel, h);
  std::ostringstream out;
  out.precision(12);
  out << "theta,phi,x,y,z,fhat\n";
  const double pi = std::numbers::pi;
  for (int it = 0; it < mesh_theta; ++it) {
    const double theta = pi * it / (mesh_theta - 1);
    for (int ip = 0; ip < mesh_phi; ++ip) {
      const double phi = 2.0 * pi * ip / mesh_phi;
      Eigen::VectorXd x(3);
      x << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta);
      double fhat = 0.0;
      if (it == 0 || it == mesh_theta - 1) {
        // poles: sin(theta) = 0, normalize explicitly
        Eigen::VectorXd pole(3);
        pole << 0.0, 0.0, (it == 0 ? 1.0 : -1.0);
        fhat = est.evaluate(UnitVector(pole));
        out << theta << ',' << phi << ',' << 0.0 << ',' << 0.0 << ','
            << pole[2] << ',' << fhat << '\n';
        continue;
      }
      fhat = est.evaluate(UnitVector(x));
      out << theta << ',' << phi << ',' << x[0] << ',' << x[1] << ',' << x[2]
          << ',' << fhat << '\n';
    }
  }
  atomic_write_file(output, out.str());
  std::cout << "h " << h << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& output,
              const std::string& csv_output,
              std::optional<std::uint64_t> seed_override) {
  nlohmann::json config_json;
  try {
    config_json = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  BenchConfig config = BenchConfig::from_json(config_json);
  if (seed_override.has_value()) config.base_seed = *seed_override;

  ordered_json report_json;
  std::string csv;
  double wall = 0.0;
  switch (config.mode) {
    case BenchMode::Mise: {
      const MiseReport report = run_mise(config);
      report_json = report.to_json();
      csv = report.to_csv();
      wall = report.wall_clock_seconds;
      break;
    }
    case BenchMode::LambdaSweep: {
      const LambdaSweepReport report = lambda_sweep(config);
      report_json = report.to_json();
      csv = report.to_csv();
      wall = report.wall_clock_seconds;
      break;
    }
    case BenchMode::RiskCurves: {
      const RiskCurvesReport report = risk_curves(config, config.single_seed);
      report_json = report.to_json();
      csv = report.to_csv();
      wall = report.wall_clock_seconds;
      break;
    }
  }
  if (!output.empty()) {
    atomic_write_file(output, report_json.dump(2) + "\n");
  }
  if (!csv_output.empty()) {
    atomic_write_file(csv_output, csv);
  }
  std::cerr << "bench finished in " << wall << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical kernel density estimation with data-driven "
               "bandwidth selection"};
  app.set_help_flag("--help", "print help");  // frees -h / --h for bandwidth
  app.require_subcommand(1);

  std::string input, output, csv_output, config_path;
  std::string method = "spco";
  std::string kernel_name = "vonmises";
  std::string h_arg = "auto";
  double lambda = 1.0;
  bool spherical = false;
  int mesh_theta = 181;
  int mesh_phi = 360;
  std::optional<std::uint64_t> seed;

  auto* select = app.add_subcommand("select", "Select a bandwidth for a "
                                              "point file");
  select->add_option("--input", input, "CSV of points")->required();
  select->add_option("--output", output, "selection report (JSON)");
  select->add_option("--method", method, "spco | cv2");
  select->add_option("--lambda", lambda, "SPCO penalty weight");
  select->add_option("--kernel", kernel_name, "kernel name");
  select->add_flag("--spherical", spherical,
                   "input rows are (theta, phi), theta = colatitude");

  auto* estimate = app.add_subcommand("estimate", "Evaluate the density "
                                                  "estimate on a mesh");
  estimate->add_option("--input", input, "CSV of points")->required();
  estimate->add_option("--h", h_arg, "bandwidth in (0,1] or 'auto'");
  estimate->add_option("--lambda", lambda, "SPCO penalty weight for 'auto'");
  estimate->add_option("--kernel", kernel_name, "kernel name");
  estimate->add_option("--output", output, "mesh CSV")->required();
  estimate->add_option("--mesh-theta", mesh_theta, "latitude rows");
  estimate->add_option("--mesh-phi", mesh_phi, "longitude columns");
  estimate->add_flag("--spherical", spherical,
                     "input rows are (theta, phi), theta = colatitude");

  auto* bench = app.add_subcommand("bench", "Run a Monte-Carlo benchmark");
  bench->add_option("--config", config_path, "bench config (JSON)")
      ->required();
  bench->add_option("--output", output, "report (JSON)");
  bench->add_option("--csv", csv_output, "per-replication CSV");
  bench->add_option("--seed", seed, "override config base_seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) {
      return cmd_select(input, method, lambda, kernel_name, output, spherical);
    }
    if (estimate->parsed()) {
      return cmd_estimate(input, h_arg, lambda, kernel_name, output, spherical,
                          mesh_theta, mesh_phi);
    }
    if (bench->parsed()) {
      return cmd_bench(config_path, output, csv_output, seed);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const GridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
