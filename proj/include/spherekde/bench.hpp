#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spherekde/selectors.hpp"
#include "spherekde/targets.hpp"

namespace spherekde {

enum class BenchMode { Mise, LambdaSweep, RiskCurves };

BenchMode bench_mode_by_name(const std::string& name);
std::string bench_mode_name(BenchMode mode);

/// Default lambda grid for sweeps (the paper leaves its grid unstated).
std::vector<double> default_lambda_grid();

struct BenchConfig {
  BenchMode mode = BenchMode::Mise;
  std::string target_id = "f1vm";
  std::optional<nlohmann::json> target_spec;  // inline component list
  std::size_t n = 500;
  std::size_t reps = 100;
  std::vector<SelectionMethod> methods = {SelectionMethod::Oracle,
                                          SelectionMethod::Spco,
                                          SelectionMethod::Cv2};
  double lambda = 1.0;  // SPCO lambda in mise mode
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t base_seed = 20240901;
  int quad_n_t = 64;   // spot-check resolution
  int quad_n_phi = 64;
  std::uint64_t single_seed = 1;  // risk-curves sample seed

  TargetDensity resolve_target() const;
  static BenchConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct MethodResult {
  std::string method;
  std::vector<double> risks;     // exact L2 risk per replication
  std::vector<double> chosen_h;  // selected bandwidth per replication
  double mean_mise = 0.0;
  double std_error = 0.0;  // sample std / sqrt(reps)
};

/// One replication's risk recomputed by sphere quadrature, as a cross-check
/// on the closed-form risk path. Only attempted when the selected bandwidth
/// is wide enough for the configured resolution to resolve the estimator.
struct QuadratureSpotCheck {
  std::string method;
  double h = 0.0;
  double closed_form = 0.0;
  double quadrature = 0.0;
  double rel_diff = 0.0;
  bool skipped = false;
};

struct MiseReport {
  BenchConfig config;
  std::vector<MethodResult> methods;
  std::vector<QuadratureSpotCheck> spot_checks;
  double wall_clock_seconds = 0.0;  // not serialized; reports are replayable

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

struct LambdaSweepRow {
  double lambda;
  double mean_risk;
  double mean_chosen_h;
};

struct LambdaSweepReport {
  BenchConfig config;
  std::vector<LambdaSweepRow> rows;
  std::vector<std::vector<double>> chosen_h;  // [lambda index][rep]
  double wall_clock_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

struct RiskCurvesReport {
  BenchConfig config;
  std::vector<double> hs;
  std::vector<double> r_oracle;  // ||f_hat_h - f||^2 - ||f||^2
  std::vector<double> r_spco;    // ||f_hat_h - f_hat_hmin||^2 + pen(h)
  std::vector<double> cv2;
  double argmin_oracle = 0.0;
  double argmin_spco = 0.0;
  double argmin_cv2 = 0.0;
  double wall_clock_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Monte-Carlo MISE table: rep r draws with seed base_seed + r, runs each
/// requested selector, scores the selected estimator by exact L2 risk.
/// Replications run on a worker pool (capped by SPHEREKDE_THREADS); results
/// are identical for any worker count.
MiseReport run_mise(const BenchConfig& config);

/// Mean risk and mean selected bandwidth of SPCO per lambda, sharing all
/// per-replication tables across the lambda grid.
LambdaSweepReport lambda_sweep(const BenchConfig& config);

/// Per-bandwidth criterion curves for one sample, plus each argmin.
RiskCurvesReport risk_curves(const BenchConfig& config,
                             std::uint64_t single_seed);

namespace detail {
/// min(jobs, SPHEREKDE_THREADS or hardware_concurrency).
std::size_t worker_count(std::size_t jobs);
}  // namespace detail

}  // namespace spherekde
