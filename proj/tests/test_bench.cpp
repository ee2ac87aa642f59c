#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "spherekde/bench.hpp"
#include "spherekde/errors.hpp"

using namespace spherekde;

namespace {

BenchConfig small_config(std::size_t n, std::size_t reps) {
  BenchConfig cfg;
  cfg.target_id = "f1vm";
  cfg.n = n;
  cfg.reps = reps;
  cfg.base_seed = 9001;
  return cfg;
}

struct ThreadEnvGuard {
  explicit ThreadEnvGuard(const char* value) {
    setenv("SPHEREKDE_THREADS", value, 1);
  }
  ~ThreadEnvGuard() { unsetenv("SPHEREKDE_THREADS"); }
};

}  // namespace

TEST_CASE("config parsing: round trip and validation") {
  const auto j = nlohmann::json::parse(R"({
    "mode": "mise",
    "target": "f2vm",
    "n": 50,
    "reps": 3,
    "methods": ["Oracle", "SPCO"],
    "lambda": 0.5,
    "base_seed": 77,
    "quadrature": {"n_t": 32, "n_phi": 48}
  })");
  const BenchConfig cfg = BenchConfig::from_json(j);
  CHECK(cfg.mode == BenchMode::Mise);
  CHECK(cfg.target_id == "f2vm");
  CHECK(cfg.n == 50);
  CHECK(cfg.reps == 3);
  CHECK(cfg.methods.size() == 2);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.quad_n_t == 32);
  CHECK(cfg.quad_n_phi == 48);

  const BenchConfig round = BenchConfig::from_json(cfg.to_json());
  CHECK(round.to_json() == cfg.to_json());

  SUBCASE("inline target specification") {
    const auto inline_j = nlohmann::json::parse(R"({
      "target": [{"kappa": 2.0, "mu": [1, 0, 0], "weight": 1.0}],
      "n": 20, "reps": 1
    })");
    const BenchConfig inline_cfg = BenchConfig::from_json(inline_j);
    const TargetDensity t = inline_cfg.resolve_target();
    CHECK(t.components().size() == 1);
  }

  SUBCASE("rejects bad fields") {
    CHECK_THROWS_AS(BenchConfig::from_json(nlohmann::json::parse(
                        R"({"mode": "nope"})")),
                    ConfigError);
    CHECK_THROWS_AS(BenchConfig::from_json(nlohmann::json::parse(
                        R"({"reps": 0})")),
                    ConfigError);
    CHECK_THROWS_AS(BenchConfig::from_json(nlohmann::json::parse(
                        R"({"methods": []})")),
                    ConfigError);
    CHECK_THROWS_AS(BenchConfig::from_json(nlohmann::json::parse(
                        R"({"methods": ["CV2"], "n": 1})")),
                    ConfigError);
    CHECK_THROWS_AS(BenchConfig::from_json(nlohmann::json::parse(
                        R"({"mode": "lambda-sweep", "lambda_grid": []})")),
                    ConfigError);
    CHECK_THROWS(BenchConfig::from_json(nlohmann::json::parse(
        R"({"target": "who"})"))
                     .resolve_target());
  }
}

TEST_CASE("run_mise: aggregation, dominance, spot checks") {
  const BenchConfig cfg = small_config(60, 6);
  const MiseReport report = run_mise(cfg);
  REQUIRE(report.methods.size() == 3);

  SUBCASE("per-replication oracle dominance and aggregate shape") {
    const auto& oracle = report.methods[0];
    CHECK(oracle.method == "Oracle");
    for (std::size_t m = 1; m < report.methods.size(); ++m) {
      const auto& other = report.methods[m];
      REQUIRE(other.risks.size() == cfg.reps);
      double mean = 0.0;
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        CHECK(oracle.risks[r] <= other.risks[r]);
        mean += other.risks[r];
      }
      mean /= static_cast<double>(cfg.reps);
      CHECK(other.mean_mise == doctest::Approx(mean).epsilon(1e-15));
      CHECK(oracle.mean_mise <= other.mean_mise);
    }
  }

  SUBCASE("standard error matches the hand formula") {
    for (const auto& m : report.methods) {
      double mean = 0.0;
      for (double r : m.risks) mean += r;
      mean /= static_cast<double>(m.risks.size());
      double ss = 0.0;
      for (double r : m.risks) ss += (r - mean) * (r - mean);
      const double se = std::sqrt(ss / (m.risks.size() - 1.0)) /
                        std::sqrt(static_cast<double>(m.risks.size()));
      CHECK(m.std_error == doctest::Approx(se).epsilon(1e-12));
    }
  }

  SUBCASE("quadrature spot checks agree where attempted") {
    CHECK(report.spot_checks.size() == 3);
    for (const auto& c : report.spot_checks) {
      if (c.skipped) continue;
      CHECK(c.rel_diff < 1e-4);
    }
  }

  SUBCASE("reps = 1 keeps exact dominance") {
    const MiseReport one = run_mise(small_config(40, 1));
    CHECK(one.methods[0].risks[0] <= one.methods[1].risks[0]);
    CHECK(one.methods[0].risks[0] <= one.methods[2].risks[0]);
    CHECK(one.methods[0].std_error == 0.0);
  }
}

TEST_CASE("determinism: reports are byte-identical across worker counts") {
  const BenchConfig cfg = small_config(80, 5);

  std::string dump_a, dump_b, csv_a, csv_b;
  {
    ThreadEnvGuard guard("1");
    const MiseReport r = run_mise(cfg);
    dump_a = r.to_json().dump(2);
    csv_a = r.to_csv();
  }
  {
    ThreadEnvGuard guard("4");
    const MiseReport r = run_mise(cfg);
    dump_b = r.to_json().dump(2);
    csv_b = r.to_csv();
  }
  CHECK(dump_a == dump_b);
  CHECK(csv_a == csv_b);

  // Re-running in-process is also stable.
  const MiseReport again = run_mise(cfg);
  CHECK(again.to_json().dump(2) == dump_a);
}

TEST_CASE("csv layout: one row per (method, rep)") {
  const BenchConfig cfg = small_config(30, 4);
  const MiseReport report = run_mise(cfg);
  const std::string csv = report.to_csv();
  std::size_t lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 1 + 3 * cfg.reps);
  CHECK(csv.rfind("method,rep,seed,chosen_h,risk\n", 0) == 0);
}

TEST_CASE("lambda_sweep: shape, overfitting regime, penalty domination") {
  BenchConfig cfg = small_config(500, 3);
  cfg.mode = BenchMode::LambdaSweep;
  cfg.lambda_grid = {-1.0, 1.0, 1e6};
  const LambdaSweepReport report = lambda_sweep(cfg);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(std::isfinite(row.mean_risk));
    CHECK(std::isfinite(row.mean_chosen_h));
  }
  // lambda = -1: overfit regime, mean chosen h within 2 h_min.
  CHECK(report.rows[0].mean_chosen_h <= 2.0 / 56.0);
  // enormous lambda: the penalty term dominates and the largest h wins.
  CHECK(report.rows[2].mean_chosen_h == 1.0);
  // risk at lambda = 1 beats the overfit regime by a wide margin.
  CHECK(report.rows[1].mean_risk < report.rows[0].mean_risk);

  SUBCASE("empty lambda grid is rejected") {
    cfg.lambda_grid.clear();
    CHECK_THROWS_AS(lambda_sweep(cfg), ConfigError);
  }
}

TEST_CASE("risk_curves reproduces the selector outputs exactly") {
  BenchConfig cfg = small_config(200, 1);
  cfg.mode = BenchMode::RiskCurves;
  const std::uint64_t seed = 31415;
  const RiskCurvesReport curves = risk_curves(cfg, seed);

  const TargetDensity f1 = TargetDensity::f1vm();
  const KernelProfile kernel = KernelProfile::von_mises();
  Sample sample = f1.sample(cfg.n, seed);
  const SelectionReport spco = spco_select(sample, kernel, cfg.lambda);
  const SelectionReport cv2 = cv2_select(sample, kernel);
  const SelectionReport oracle = oracle_select(sample, kernel, f1);

  CHECK(curves.argmin_spco == spco.chosen_h);
  CHECK(curves.argmin_cv2 == cv2.chosen_h);
  CHECK(curves.argmin_oracle == oracle.chosen_h);
  REQUIRE(curves.hs.size() == spco.table.size());
  for (std::size_t i = 0; i < curves.hs.size(); ++i) {
    CHECK(curves.r_spco[i] == spco.table[i].criterion);
    CHECK(curves.cv2[i] == cv2.table[i].criterion);
    CHECK(curves.r_oracle[i] ==
          doctest::Approx(oracle.table[i].risk_shifted).epsilon(1e-12));
  }
  // R_SPCO(h_min) = pen(h_min).
  const double hmin = spco.grid.h_min();
  const double c0m = c0(kernel, hmin, 3);
  CHECK(curves.r_spco.front() ==
        doctest::Approx(c0m * c0m * c2(kernel, hmin, 3) / cfg.n)
            .epsilon(1e-10));
}

TEST_CASE("worker_count caps by environment") {
  ThreadEnvGuard guard("2");
  CHECK(detail::worker_count(10) == 2);
  CHECK(detail::worker_count(1) == 1);
}
