#pragma once

#include <cstddef>
#include <vector>

#include "spherekde/geometry.hpp"
#include "spherekde/kernel.hpp"

namespace spherekde {

/// The observations X_1..X_n plus an optional pairwise cache of
/// r_ij = ||X_i + X_j|| in [0, 2], shared by every bandwidth a selector
/// visits. Build the cache once, before any concurrent reads.
class Sample {
public:
  explicit Sample(std::vector<UnitVector> points);

  std::size_t size() const { return points_.size(); }
  int dim() const { return d_; }
  const UnitVector& point(std::size_t i) const { return points_[i]; }
  const std::vector<UnitVector>& points() const { return points_; }

  /// O(n^2) once; idempotent.
  void build_pairwise_cache();
  bool has_pairwise_cache() const { return cache_built_; }

  /// ||X_i + X_j||; reads the cache when built, else computes directly.
  double pair_r(std::size_t i, std::size_t j) const;

  /// Off-diagonal r values sorted descending (pairs i < j, each once).
  /// Requires the cache.
  const std::vector<double>& pair_r_sorted_desc() const;

private:
  std::vector<UnitVector> points_;
  int d_;
  bool cache_built_ = false;
  std::vector<double> pair_r_;         // lower triangle, i > j
  std::vector<double> pair_r_sorted_;  // descending
};

/// f_hat_h for a fixed sample, kernel and bandwidth. Immutable; the sample
/// must outlive the estimator. The normalizer c_0(h) is computed once at
/// construction.
class FittedEstimator {
public:
  FittedEstimator(const Sample& sample, KernelProfile kernel, double h);

  double h() const { return h_; }
  double c0() const { return c0_; }
  const Sample& sample() const { return *sample_; }
  const KernelProfile& kernel() const { return kernel_; }

  /// f_hat_h(x) = c_0(h)/n sum_i K((1 - x.X_i)/h^2).
  double evaluate(const UnitVector& x) const;

  /// Leave-one-out variant omitting X_i, with denominator n - 1.
  double loo_evaluate(std::size_t i, const UnitVector& x) const;

  /// ||f_hat_h||^2. Closed form for the von Mises kernel on S^2 (stable
  /// rewriting of the pairwise sinh sum); sphere-quadrature fallback for
  /// generic kernels on S^2, with accuracy governed by the default 64x64
  /// resolution.
  double sq_norm() const;

  /// ||f_hat_h - f_hat_h2||^2 >= 0 for an estimator on the same sample with
  /// the same kernel.
  double diff_sq_norm(const FittedEstimator& other) const;

private:
  const Sample* sample_;
  KernelProfile kernel_;
  double h_;
  double c0_;
};

namespace detail {

/// sum over all ordered pairs (i,j) of e^{-(1/h^2 + 1/h2^2)} sinh(rho_ij)/rho_ij
/// with rho_ij = ||X_i/h^2 + X_j/h2^2||. All terms are evaluated with
/// nonpositive exponents; pairs whose exponent falls below -55 relative to
/// the diagonal are skipped (their total is < 1e-16 of the sum).
double pair_sum_cross(const Sample& sample, double h, double h2);

/// pair_sum_cross(h, h), using the cheaper single-scale expression.
double pair_sum_self(const Sample& sample, double h);

/// sum_{i != j} K((1 - X_i.X_j)/h^2) for the von Mises kernel.
double pair_sum_loo(const Sample& sample, double h);

}  // namespace detail

}  // namespace spherekde
