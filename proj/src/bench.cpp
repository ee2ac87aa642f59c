#include "spherekde/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "spherekde/errors.hpp"

namespace spherekde {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return sd / std::sqrt(static_cast<double>(v.size()));
}

/// Runs fn(0..jobs-1) on the worker pool; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const std::size_t workers = detail::worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(error);
}

json methods_to_json(const std::vector<SelectionMethod>& methods) {
  json arr = json::array();
  for (auto m : methods) arr.push_back(method_name(m));
  return arr;
}

}  // namespace

namespace detail {

std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("SPHEREKDE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) {
      cap = static_cast<std::size_t>(parsed);
    }
  }
  return std::min(cap, std::max<std::size_t>(jobs, 1));
}

}  // namespace detail

BenchMode bench_mode_by_name(const std::string& name) {
  if (name == "mise") return BenchMode::Mise;
  if (name == "lambda-sweep") return BenchMode::LambdaSweep;
  if (name == "risk-curves") return BenchMode::RiskCurves;
  throw ConfigError("config.mode: unknown mode '" + name + "'");
}

std::string bench_mode_name(BenchMode mode) {
  switch (mode) {
    case BenchMode::Mise: return "mise";
    case BenchMode::LambdaSweep: return "lambda-sweep";
    case BenchMode::RiskCurves: return "risk-curves";
  }
  throw std::logic_error("unreachable");
}

std::vector<double> default_lambda_grid() {
  return {-1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0};
}

TargetDensity BenchConfig::resolve_target() const {
  if (target_spec.has_value()) {
    return TargetDensity::from_json(*target_spec);
  }
  return TargetDensity::by_name(target_id);
}

BenchConfig BenchConfig::from_json(const json& j) {
  BenchConfig cfg;
  try {
    if (j.contains("mode")) {
      cfg.mode = bench_mode_by_name(j.at("mode").get<std::string>());
    }
    if (j.contains("target")) {
      const auto& t = j.at("target");
      if (t.is_string()) {
        cfg.target_id = t.get<std::string>();
      } else {
        cfg.target_id = "custom";
        cfg.target_spec = t;
      }
    }
    if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
    if (j.contains("reps")) cfg.reps = j.at("reps").get<std::size_t>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) {
        cfg.methods.push_back(method_by_name(m.get<std::string>()));
      }
    }
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("lambda_grid")) {
      cfg.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    }
    if (j.contains("base_seed")) {
      cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("quadrature")) {
      cfg.quad_n_t = j.at("quadrature").at("n_t").get<int>();
      cfg.quad_n_phi = j.at("quadrature").at("n_phi").get<int>();
    }
    if (j.contains("single_seed")) {
      cfg.single_seed = j.at("single_seed").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.reps < 1) throw ConfigError("config.reps: must be >= 1");
  if (cfg.n < 1) throw ConfigError("config.n: must be >= 1");
  if (cfg.methods.empty()) throw ConfigError("config.methods: empty");
  for (auto m : cfg.methods) {
    if (m == SelectionMethod::Cv2 && cfg.n < 2) {
      throw ConfigError("config.n: CV2 needs n >= 2");
    }
  }
  if (cfg.mode == BenchMode::LambdaSweep && cfg.lambda_grid.empty()) {
    throw ConfigError("config.lambda_grid: empty");
  }
  return cfg;
}

json BenchConfig::to_json() const {
  json j;
  j["mode"] = bench_mode_name(mode);
  if (target_spec.has_value()) {
    j["target"] = *target_spec;
  } else {
    j["target"] = target_id;
  }
  j["n"] = n;
  j["reps"] = reps;
  j["methods"] = methods_to_json(methods);
  j["lambda"] = lambda;
  j["lambda_grid"] = lambda_grid;
  j["base_seed"] = base_seed;
  j["quadrature"] = {{"n_t", quad_n_t}, {"n_phi", quad_n_phi}};
  j["single_seed"] = single_seed;
  return j;
}

namespace {

struct RepOutcome {
  // Indexed like config.methods.
  std::vector<double> chosen_h;
  std::vector<double> risks;
};

RepOutcome run_replication(const BenchConfig& config,
                           const TargetDensity& target, std::size_t rep,
                           const KernelProfile& kernel) {
  Sample sample = target.sample(config.n, config.base_seed + rep);
  detail::SelectorTables tables(sample, kernel);
  const auto risks = tables.oracle_risks(target);

  RepOutcome out;
  for (const auto method : config.methods) {
    std::size_t idx = 0;
    switch (method) {
      case SelectionMethod::Spco:
        idx = detail::argmin_prefer_last(tables.spco_criterion(config.lambda));
        break;
      case SelectionMethod::Cv2:
        idx = detail::argmin_prefer_last(tables.cv2_criterion());
        break;
      case SelectionMethod::Oracle:
        idx = detail::argmin_prefer_last(risks);
        break;
    }
    out.chosen_h.push_back(tables.grid().bandwidths[idx]);
    out.risks.push_back(risks[idx]);
  }
  return out;
}

QuadratureSpotCheck spot_check_risk(const BenchConfig& config,
                                    const TargetDensity& target,
                                    const KernelProfile& kernel,
                                    const std::string& method, double h,
                                    double closed_form) {
  QuadratureSpotCheck check;
  check.method = method;
  check.h = h;
  check.closed_form = closed_form;
  // The fixed product rule resolves kernels of width h once the per-axis
  // resolution exceeds a few nodes per h radian; below that the closed form
  // is the only trustworthy route and the check is skipped.
  if (h * std::min(config.quad_n_t, config.quad_n_phi) < 14.0) {
    check.skipped = true;
    return check;
  }
  Sample sample = target.sample(config.n, config.base_seed);
  FittedEstimator est(sample, kernel, h);
  const SphereQuadrature quad =
      product_quadrature_s2(config.quad_n_t, config.quad_n_phi);
  check.quadrature = quad.integrate([&](const UnitVector& x) {
    const double d = est.evaluate(x) - target.density(x);
    return d * d;
  });
  check.rel_diff = std::abs(check.quadrature - closed_form) /
                   std::max(1e-300, std::abs(closed_form));
  return check;
}

}  // namespace

MiseReport run_mise(const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const TargetDensity target = config.resolve_target();
  const KernelProfile kernel = KernelProfile::von_mises();

  std::vector<RepOutcome> outcomes(config.reps);
  parallel_for(config.reps, [&](std::size_t rep) {
    outcomes[rep] = run_replication(config, target, rep, kernel);
  });

  MiseReport report;
  report.config = config;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodResult res;
    res.method = method_name(config.methods[m]);
    res.risks.reserve(config.reps);
    res.chosen_h.reserve(config.reps);
    for (const auto& rep : outcomes) {
      res.risks.push_back(rep.risks[m]);
      res.chosen_h.push_back(rep.chosen_h[m]);
    }
    res.mean_mise = mean_of(res.risks);
    res.std_error = std_error_of(res.risks);
    report.methods.push_back(std::move(res));
  }
  // One replication per method re-scored by sphere quadrature.
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    report.spot_checks.push_back(spot_check_risk(
        config, target, kernel, report.methods[m].method,
        report.methods[m].chosen_h.front(), report.methods[m].risks.front()));
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

LambdaSweepReport lambda_sweep(const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.lambda_grid.empty()) {
    throw ConfigError("lambda_sweep: empty lambda grid");
  }
  const TargetDensity target = config.resolve_target();
  const KernelProfile kernel = KernelProfile::von_mises();
  const std::size_t l = config.lambda_grid.size();

  // risk_by_lambda[lambda][rep], chosen_by_lambda[lambda][rep]
  std::vector<std::vector<double>> risk(l, std::vector<double>(config.reps));
  std::vector<std::vector<double>> chosen(l, std::vector<double>(config.reps));

  parallel_for(config.reps, [&](std::size_t rep) {
    Sample sample = target.sample(config.n, config.base_seed + rep);
    detail::SelectorTables tables(sample, kernel);
    const auto risks = tables.oracle_risks(target);
    for (std::size_t k = 0; k < l; ++k) {
      const std::size_t idx = detail::argmin_prefer_last(
          tables.spco_criterion(config.lambda_grid[k]));
      chosen[k][rep] = tables.grid().bandwidths[idx];
      risk[k][rep] = risks[idx];
    }
  });

  LambdaSweepReport report;
  report.config = config;
  for (std::size_t k = 0; k < l; ++k) {
    report.rows.push_back(LambdaSweepRow{config.lambda_grid[k],
                                         mean_of(risk[k]),
                                         mean_of(chosen[k])});
  }
  report.chosen_h = std::move(chosen);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

RiskCurvesReport risk_curves(const BenchConfig& config,
                             std::uint64_t single_seed) {
  const auto start = std::chrono::steady_clock::now();
  const TargetDensity target = config.resolve_target();
  const KernelProfile kernel = KernelProfile::von_mises();

  Sample sample = target.sample(config.n, single_seed);
  detail::SelectorTables tables(sample, kernel);
  const double f_sq = target.exact_sq_norm();

  RiskCurvesReport report;
  report.config = config;
  report.hs = tables.grid().bandwidths;
  const auto risks = tables.oracle_risks(target);
  const auto spco = tables.spco_criterion(config.lambda);
  const auto cv2 = tables.cv2_criterion();
  report.r_oracle.reserve(risks.size());
  for (double r : risks) report.r_oracle.push_back(r - f_sq);
  report.r_spco = spco;
  report.cv2 = cv2;
  report.argmin_oracle =
      report.hs[detail::argmin_prefer_last(risks)];
  report.argmin_spco = report.hs[detail::argmin_prefer_last(spco)];
  report.argmin_cv2 = report.hs[detail::argmin_prefer_last(cv2)];
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

ordered_json MiseReport::to_json() const {
  ordered_json j;
  j["schema"] = "spherekde-report/1";
  j["kind"] = "mise";
  j["config"] = config.to_json();
  ordered_json methods_json = ordered_json::array();
  for (const auto& m : methods) {
    ordered_json mj;
    mj["method"] = m.method;
    mj["mean_mise"] = m.mean_mise;
    mj["std_error"] = m.std_error;
    mj["risks"] = m.risks;
    mj["chosen_h"] = m.chosen_h;
    methods_json.push_back(std::move(mj));
  }
  j["methods"] = std::move(methods_json);
  ordered_json checks = ordered_json::array();
  for (const auto& c : spot_checks) {
    ordered_json cj;
    cj["method"] = c.method;
    cj["h"] = c.h;
    cj["skipped"] = c.skipped;
    if (!c.skipped) {
      cj["closed_form"] = c.closed_form;
      cj["quadrature"] = c.quadrature;
      cj["rel_diff"] = c.rel_diff;
    }
    checks.push_back(std::move(cj));
  }
  j["quadrature_spot_checks"] = std::move(checks);
  return j;
}

std::string MiseReport::to_csv() const {
  std::ostringstream out;
  out << "method,rep,seed,chosen_h,risk\n";
  out.precision(17);
  for (const auto& m : methods) {
    for (std::size_t rep = 0; rep < m.risks.size(); ++rep) {
      out << m.method << ',' << rep << ',' << (config.base_seed + rep) << ','
          << m.chosen_h[rep] << ',' << m.risks[rep] << '\n';
    }
  }
  return out.str();
}

ordered_json LambdaSweepReport::to_json() const {
  ordered_json j;
  j["schema"] = "spherekde-report/1";
  j["kind"] = "lambda-sweep";
  j["config"] = config.to_json();
  ordered_json rows_json = ordered_json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ordered_json rj;
    rj["lambda"] = rows[k].lambda;
    rj["mean_risk"] = rows[k].mean_risk;
    rj["mean_chosen_h"] = rows[k].mean_chosen_h;
    rj["chosen_h"] = chosen_h[k];
    rows_json.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows_json);
  return j;
}

std::string LambdaSweepReport::to_csv() const {
  std::ostringstream out;
  out << "lambda,mean_risk,mean_chosen_h\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.lambda << ',' << r.mean_risk << ',' << r.mean_chosen_h << '\n';
  }
  return out.str();
}

ordered_json RiskCurvesReport::to_json() const {
  ordered_json j;
  j["schema"] = "spherekde-report/1";
  j["kind"] = "risk-curves";
  j["config"] = config.to_json();
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    ordered_json rj;
    rj["h"] = hs[i];
    rj["r_oracle"] = r_oracle[i];
    rj["r_spco"] = r_spco[i];
    rj["cv2"] = cv2[i];
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["argmin"] = {{"oracle", argmin_oracle},
                 {"spco", argmin_spco},
                 {"cv2", argmin_cv2}};
  return j;
}

std::string RiskCurvesReport::to_csv() const {
  std::ostringstream out;
  out << "h,r_oracle,r_spco,cv2\n";
  out.precision(17);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    out << hs[i] << ',' << r_oracle[i] << ',' << r_spco[i] << ',' << cv2[i]
        << '\n';
  }
  return out.str();
}

}  // namespace spherekde
