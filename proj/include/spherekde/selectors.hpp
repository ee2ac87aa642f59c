#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spherekde/estimator.hpp"
#include "spherekde/kernel.hpp"
#include "spherekde/targets.hpp"

namespace spherekde {

/// The admissible set H = {1/m : 1 <= m <= m_max} with
/// m_max = floor((n R_0(K) / ||K||_inf)^{1/(d-1)}), sorted ascending.
struct BandwidthGrid {
  std::vector<double> bandwidths;
  int m_max = 0;
  std::size_t n = 0;
  int d = 0;
  std::string kernel_id;

  double h_min() const { return bandwidths.front(); }
  std::size_t size() const { return bandwidths.size(); }
  bool contains(double h) const;
  std::size_t index_of(double h) const;  // throws std::domain_error if absent
};

BandwidthGrid build_grid(std::size_t n, int d, const KernelProfile& kernel);

enum class SelectionMethod { Spco, Cv2, Oracle };

std::string method_name(SelectionMethod method);
SelectionMethod method_by_name(const std::string& name);

/// One grid row of a selection run. Columns that a method does not produce
/// are NaN.
struct SelectionRow {
  double h;
  double criterion;
  double penalty;        // SPCO
  double diff_sq_norm;   // SPCO: ||f_hat_h - f_hat_hmin||^2
  double risk_shifted;   // Oracle: criterion - ||f||^2
};

struct SelectionReport {
  SelectionMethod method;
  double lambda;  // NaN unless SPCO
  double chosen_h;
  std::vector<SelectionRow> table;
  BandwidthGrid grid;
};

/// pen_lambda(h) via the expanded three-term form
/// (lambda - 1) c0^2(h) c2(h)/n - c0^2(hmin) c2(hmin)/n
///   + 2 c0(h) c0(hmin) <K_{h^2}, K_{hmin^2}>/n.
double penalty(double h, const BandwidthGrid& grid, double lambda,
               const KernelProfile& kernel);

/// SPCO: argmin_h ||f_hat_h - f_hat_hmin||^2 + pen_lambda(h). Ties break
/// toward the larger h. Builds the sample's pairwise cache if absent.
SelectionReport spco_select(Sample& sample, const KernelProfile& kernel,
                            double lambda = 1.0);

/// Least-squares cross-validation: argmin_h ||f_hat_h||^2
/// - 2/n sum_i f_hat_{h,i}(X_i).
SelectionReport cv2_select(Sample& sample, const KernelProfile& kernel);

/// argmin_h ||f_hat_h - f||^2 against a known target; table criteria are the
/// unshifted squared risks (||f||^2 included).
SelectionReport oracle_select(Sample& sample, const KernelProfile& kernel,
                              const TargetDensity& target);

namespace detail {

/// Index of the minimum, preferring the later (larger-h) entry on ties.
std::size_t argmin_prefer_last(const std::vector<double>& values);

/// Per-sample tables shared by the selectors and the bench harness: all
/// closed-form constants and pairwise sums are computed once per (sample,
/// kernel) and reused across bandwidths, methods and lambda values.
class SelectorTables {
public:
  SelectorTables(Sample& sample, const KernelProfile& kernel);

  const BandwidthGrid& grid() const { return grid_; }
  std::size_t n() const;

  const std::vector<double>& c0s() const { return c0s_; }
  /// c0^2(h) c2(h) per grid index.
  const std::vector<double>& variance_term() const { return var_; }
  /// <K_{h^2}, K_{hmin^2}> per grid index.
  const std::vector<double>& cross_to_hmin() const { return cross_; }
  /// ||f_hat_h - f_hat_hmin||^2 per grid index (lazy).
  const std::vector<double>& diff_sq_norms();
  /// ||f_hat_h||^2 per grid index (lazy).
  const std::vector<double>& sq_norms();
  /// sum_{i != j} K((1 - X_i.X_j)/h^2) per grid index (lazy).
  const std::vector<double>& loo_sums();
  /// <f_hat_h, f> per grid index (lazy).
  const std::vector<double>& inners(const TargetDensity& target);

  double penalty_at(std::size_t idx, double lambda) const;
  std::vector<double> spco_criterion(double lambda);
  std::vector<double> cv2_criterion();
  /// Unshifted risks ||f_hat_h||^2 - 2 <f_hat_h, f> + ||f||^2.
  std::vector<double> oracle_risks(const TargetDensity& target);

private:
  const std::vector<double>& self_sums();

  Sample* sample_;
  const KernelProfile* kernel_;
  BandwidthGrid grid_;
  std::vector<double> c0s_, var_, cross_;
  std::vector<double> selfs_, diff_, sq_, loo_, inner_;
  double target_sq_norm_ = 0.0;
  bool have_selfs_ = false, have_diff_ = false, have_sq_ = false,
       have_loo_ = false, have_inner_ = false;
};

}  // namespace detail

}  // namespace spherekde
