#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spherekde/errors.hpp"
#include "spherekde/selectors.hpp"
#include "spherekde/targets.hpp"

using namespace spherekde;

namespace {
constexpr double kPi = std::numbers::pi;

UnitVector unit3(double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return UnitVector(std::move(v));
}

// Int_{S^2} (c0m K((1-t)/hm^2) - c0h K((1-t)/h^2))^2 w(dy) by composite
// Gauss-Legendre: one panel on the fine scale u = (1-t)/hm^2 where all three
// expansion terms live, plus one panel on the coarse scale w = (1-t)/h^2 for
// the slowly decaying c0h^2 component (the fine-scale terms are below
// e^{-60} there).
double pen_integral_oracle(double c0m, double c0h, double hm, double h) {
  const double s = (hm * hm) / (h * h);
  const double u_max = 2.0 / (hm * hm);
  const double u_a = std::min(u_max, 60.0);
  double integral = oracles::gl_integral(
      [&](double u) {
        const double d = c0m * std::exp(-u) - c0h * std::exp(-u * s);
        return d * d;
      },
      0.0, u_a);
  if (u_max > 60.0) {
    const double w_lo = 60.0 * s;
    const double w_hi = std::min(2.0 / (h * h), w_lo + 30.0);
    if (w_hi > w_lo) {
      integral += (c0h * c0h / s) *
                  oracles::gl_integral(
                      [](double w) { return std::exp(-2.0 * w); }, w_lo,
                      w_hi);
    }
  }
  return 2.0 * kPi * hm * hm * integral;
}
}  // namespace

TEST_CASE("build_grid reproduces the admissible set") {
  const KernelProfile k = KernelProfile::von_mises();

  SUBCASE("pinned sizes: floor(sqrt(2 pi n))") {
    const BandwidthGrid g500 = build_grid(500, 3, k);
    CHECK(g500.m_max == 56);
    CHECK(g500.size() == 56);
    CHECK(g500.h_min() == 1.0 / 56.0);

    const BandwidthGrid g100 = build_grid(100, 3, k);
    CHECK(g100.m_max == 25);
    CHECK(g100.h_min() == 1.0 / 25.0);

    const BandwidthGrid g1 = build_grid(1, 3, k);
    CHECK(g1.m_max == 2);
    REQUIRE(g1.size() == 2);
    CHECK(g1.bandwidths[0] == 0.5);
    CHECK(g1.bandwidths[1] == 1.0);
  }

  SUBCASE("grid invariants") {
    const BandwidthGrid g = build_grid(500, 3, k);
    const KernelConstants c = kernel_constants(k, 3);
    const double lower =
        std::pow(k.sup_norm() / (500.0 * c.r0), 1.0 / (3 - 1));
    double prev = 0.0;
    for (double h : g.bandwidths) {
      CHECK(h > prev);
      CHECK(h >= lower * (1.0 - 1e-12));
      CHECK(h <= 1.0);
      const double m = 1.0 / h;
      CHECK(std::abs(m - std::round(m)) < 1e-9);
      prev = h;
    }
    CHECK(g.contains(0.25));
    CHECK(g.contains(1.0 / 56.0));
    CHECK(!g.contains(1.0 / 57.0));
    CHECK(!g.contains(0.3));
    CHECK(g.index_of(1.0 / 56.0) == 0);
    CHECK(g.index_of(1.0) == 55);
  }

  SUBCASE("empty grid raises a configuration error") {
    // A sharply concentrated profile has tiny alpha_0, so R_0 cannot offset
    // sup-norm 1 at n = 1.
    const KernelProfile sharp = KernelProfile::generic(
        "sharp", [](double x) { return std::exp(-100.0 * x); });
    CHECK_THROWS_AS(build_grid(1, 3, sharp), GridError);
  }
}

TEST_CASE("penalty: closed identities and the quadrature route") {
  const KernelProfile k = KernelProfile::von_mises();
  const BandwidthGrid grid = build_grid(500, 3, k);
  const double hmin = grid.h_min();
  const double n = 500.0;

  SUBCASE("lambda = 1 at h_min leaves only the variance term") {
    const double c0m = c0(k, hmin, 3);
    const double expected = c0m * c0m * c2(k, hmin, 3) / n;
    CHECK(oracles::rel_err(penalty(hmin, grid, 1.0, k), expected) < 1e-12);
  }

  SUBCASE("linearity in lambda") {
    for (double h : {1.0, 0.25, 1.0 / 17.0}) {
      const double c0h = c0(k, h, 3);
      const double var_h = c0h * c0h * c2(k, h, 3) / n;
      for (double lambda : {-1.0, 0.5, 2.0}) {
        const double lhs = penalty(h, grid, lambda, k);
        const double rhs = penalty(h, grid, 0.0, k) + lambda * var_h;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
      }
    }
  }

  SUBCASE("off-grid bandwidths are rejected") {
    CHECK_THROWS_AS(penalty(0.3, grid, 1.0, k), std::domain_error);
    CHECK_THROWS_AS(penalty(1.0 / 57.0, grid, 1.0, k), std::domain_error);
  }

  SUBCASE("expanded form equals the literal squared-difference integral") {
    // pen_lambda(h) = lambda c0^2 c2 / n - (1/n) Int (c0m K_m - c0h K_h)^2,
    // the integral evaluated directly on the substituted polar variable.
    for (double h : {1.0, 0.25, 1.0 / 56.0}) {
      const double lambda = 1.0;
      const double c0h = c0(k, h, 3);
      const double c0m = c0(k, hmin, 3);
      const double direct = lambda * c0h * c0h * c2(k, h, 3) / n -
                            pen_integral_oracle(c0m, c0h, hmin, h) / n;
      CHECK(oracles::rel_err(penalty(h, grid, lambda, k), direct) < 1e-8);
    }
  }
}

TEST_CASE("argmin prefers the larger bandwidth on ties") {
  CHECK(detail::argmin_prefer_last({3.0, 1.0, 2.0}) == 1);
  CHECK(detail::argmin_prefer_last({1.0, 1.0, 2.0}) == 1);
  CHECK(detail::argmin_prefer_last({2.0, 1.0, 1.0}) == 2);
  CHECK(detail::argmin_prefer_last({1.0, 1.0, 1.0}) == 2);
  CHECK_THROWS_AS(detail::argmin_prefer_last({}), std::domain_error);

  SUBCASE("shifting every value leaves the argmin unchanged") {
    const std::vector<double> base = {0.4, 0.1, 0.1, 0.7};
    std::vector<double> shifted = base;
    for (double& v : shifted) v += 123.5;
    CHECK(detail::argmin_prefer_last(base) ==
          detail::argmin_prefer_last(shifted));
  }
}

TEST_CASE("spco_select: report structure and closed identities") {
  const KernelProfile k = KernelProfile::von_mises();
  Sample s = TargetDensity::f1vm().sample(60, 101);

  for (double lambda : {1.0, 0.5}) {
    const SelectionReport report = spco_select(s, k, lambda);
    CHECK(report.method == SelectionMethod::Spco);
    CHECK(report.lambda == lambda);
    CHECK(report.grid.contains(report.chosen_h));
    CHECK(report.table.size() == report.grid.size());

    // crit(h_min) = pen(h_min) = lambda c0^2(hmin) c2(hmin) / n.
    const double hmin = report.grid.h_min();
    const double c0m = c0(k, hmin, 3);
    const double expected_min =
        lambda * c0m * c0m * c2(k, hmin, 3) / static_cast<double>(s.size());
    CHECK(oracles::rel_err(report.table.front().criterion, expected_min) <
          1e-10);
    CHECK(report.table.front().diff_sq_norm == 0.0);

    // chosen_h attains the table minimum.
    double best = report.table.front().criterion;
    for (const auto& row : report.table) best = std::min(best, row.criterion);
    const std::size_t idx = report.grid.index_of(report.chosen_h);
    CHECK(report.table[idx].criterion == best);

    // Rows decompose as criterion = diff + penalty.
    for (const auto& row : report.table) {
      CHECK(std::abs(row.criterion - (row.diff_sq_norm + row.penalty)) <
            1e-12 * std::max(1.0, std::abs(row.criterion)));
    }
  }
}

TEST_CASE("spco criterion matches the unexpanded route by quadrature") {
  // ||f_hat_h - f_hat_hmin||^2 + pen_1(h) assembled from the adapted pair
  // oracle and the literal penalty integral, per grid bandwidth.
  const KernelProfile k = KernelProfile::von_mises();
  Sample s = TargetDensity::f1vm().sample(20, 113);
  const SelectionReport report = spco_select(s, k, 1.0);
  const BandwidthGrid& grid = report.grid;
  const double hmin = grid.h_min();
  FittedEstimator base(s, k, hmin);
  const double n = static_cast<double>(s.size());

  for (std::size_t i = 0; i < grid.size(); i += 5) {
    const double h = grid.bandwidths[i];
    FittedEstimator est(s, k, h);
    const double diff_oracle =
        (i == 0) ? 0.0 : oracles::diff_sq_norm_oracle(est, base);
    const double pen_oracle =
        est.c0() * est.c0() * c2(k, h, 3) / n -
        pen_integral_oracle(base.c0(), est.c0(), hmin, h) / n;
    const double crit_oracle = diff_oracle + pen_oracle;
    CHECK(std::abs(report.table[i].criterion - crit_oracle) <
          1e-8 * std::max(1.0, std::abs(crit_oracle)));
  }
}

TEST_CASE("spco stochastic behavior at n = 500") {
  const KernelProfile k = KernelProfile::von_mises();
  const TargetDensity f1 = TargetDensity::f1vm();

  SUBCASE("selected bandwidth concentrates near 1/4") {
    int near = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
      Sample s = f1.sample(500, 300 + rep);
      const double h = spco_select(s, k, 1.0).chosen_h;
      if (h >= 1.0 / 5.0 && h <= 1.0 / 3.0) ++near;
    }
    CHECK(near >= 16);  // within one grid neighbor of 1/4 in >= 80% of runs
  }

  SUBCASE("lambda = -1 selects near the overfitting bandwidth") {
    // Theorem-2 scaling: h_hat <= (1.23 (2.1 + 1))^{1/2} h_min ~ 1.95 h_min.
    int overfit = 0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
      Sample s = f1.sample(500, 400 + rep);
      const SelectionReport report = spco_select(s, k, -1.0);
      if (report.chosen_h <= 2.0 * report.grid.h_min()) ++overfit;
    }
    CHECK(overfit >= 9);
  }
}

TEST_CASE("cv2_select: hand-computed case and error paths") {
  const KernelProfile k = KernelProfile::von_mises();

  SUBCASE("n = 2 term-by-term") {
    Sample s({unit3(1.0, 0.0, 0.0), unit3(0.0, 1.0, 0.0)});
    const SelectionReport report = cv2_select(s, k);
    // Brute force each criterion value: ||f_hat||^2 by the pair oracle and
    // the leave-one-out terms by direct evaluation.
    for (const auto& row : report.table) {
      FittedEstimator est(s, k, row.h);
      const double loo = est.loo_evaluate(0, s.point(0)) +
                         est.loo_evaluate(1, s.point(1));
      const double expected = oracles::sq_norm_oracle(est) - loo;
      CHECK(std::abs(row.criterion - expected) <
            1e-8 * std::max(1.0, std::abs(expected)));
    }
  }

  SUBCASE("a single observation is not enough") {
    Sample s({unit3(1.0, 0.0, 0.0)});
    CHECK_THROWS_AS(cv2_select(s, k), InsufficientDataError);
  }

  SUBCASE("duplicated points push the selection toward overfitting") {
    Sample base = TargetDensity::f1vm().sample(30, 511);
    std::vector<UnitVector> doubled;
    for (std::size_t i = 0; i < base.size(); ++i) {
      doubled.push_back(base.point(i));
      doubled.push_back(base.point(i));
    }
    Sample dup(std::move(doubled));
    const SelectionReport report = cv2_select(dup, k);
    CHECK(report.chosen_h <= 2.0 * report.grid.h_min());
  }

  SUBCASE("selected bandwidth concentrates near 1/4 at n = 500") {
    int near = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
      Sample s = TargetDensity::f1vm().sample(500, 600 + rep);
      const double h = cv2_select(s, k).chosen_h;
      if (h >= 1.0 / 5.0 && h <= 1.0 / 3.0) ++near;
    }
    CHECK(near >= 16);
  }
}

TEST_CASE("oracle_select: dominance and the self-target degenerate case") {
  const KernelProfile k = KernelProfile::von_mises();
  const TargetDensity f1 = TargetDensity::f1vm();

  SUBCASE("per-realization dominance over the other selectors") {
    Sample s = f1.sample(200, 131);
    const SelectionReport oracle = oracle_select(s, k, f1);
    const SelectionReport spco = spco_select(s, k, 1.0);
    const SelectionReport cv2 = cv2_select(s, k);
    const auto risk_at = [&](double h) {
      return oracle.table[oracle.grid.index_of(h)].criterion;
    };
    CHECK(risk_at(oracle.chosen_h) <= risk_at(spco.chosen_h));
    CHECK(risk_at(oracle.chosen_h) <= risk_at(cv2.chosen_h));

    // Shifted diagnostics differ from criteria by ||f||^2 exactly.
    const double f_sq = f1.exact_sq_norm();
    for (const auto& row : oracle.table) {
      CHECK(std::abs(row.criterion - row.risk_shifted - f_sq) <
            1e-12 * std::max(1.0, std::abs(row.criterion)));
    }
  }

  SUBCASE("a target equal to the fitted estimator is recovered exactly") {
    // For n = 1 the estimator at bandwidth h is itself a vMF density with
    // kappa = 1/h^2 centered at the observation; the oracle must select h
    // with zero risk.
    const UnitVector x = unit3(0.36, -0.8, 0.48);
    Sample s({x});
    const double h_star = 0.5;
    const TargetDensity self_target(
        {VmfComponent{1.0 / (h_star * h_star), x, 1.0}});
    const SelectionReport report = oracle_select(s, k, self_target);
    CHECK(report.chosen_h == h_star);
    CHECK(std::abs(report.table[report.grid.index_of(h_star)].criterion) <
          1e-10);
  }
}
