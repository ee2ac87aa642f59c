#include "spherekde/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spherekde/errors.hpp"
#include "spherekde/stable.hpp"

namespace spherekde {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

bool BandwidthGrid::contains(double h) const {
  if (!(h > 0.0) || h > 1.0) return false;
  const double m = 1.0 / h;
  const double rounded = std::round(m);
  if (std::abs(m - rounded) > 1e-9 * rounded) return false;
  const int mi = static_cast<int>(rounded);
  return mi >= 1 && mi <= m_max;
}

std::size_t BandwidthGrid::index_of(double h) const {
  if (!contains(h)) {
    throw std::domain_error("bandwidth is not a grid point");
  }
  const int m = static_cast<int>(std::round(1.0 / h));
  // bandwidths are ascending: index 0 holds 1/m_max.
  return static_cast<std::size_t>(m_max - m);
}

BandwidthGrid build_grid(std::size_t n, int d, const KernelProfile& kernel) {
  if (n < 1) throw std::domain_error("build_grid: n must be >= 1");
  const KernelConstants constants = kernel_constants(kernel, d);
  const double ratio =
      static_cast<double>(n) * constants.r0 / kernel.sup_norm();
  const int m_max =
      static_cast<int>(std::floor(std::pow(ratio, 1.0 / (d - 1))));
  if (m_max < 1) {
    throw GridError("build_grid: empty bandwidth grid (n too small for this "
                    "kernel)");
  }
  BandwidthGrid grid;
  grid.m_max = m_max;
  grid.n = n;
  grid.d = d;
  grid.kernel_id = kernel.name();
  grid.bandwidths.reserve(static_cast<std::size_t>(m_max));
  for (int m = m_max; m >= 1; --m) {
    grid.bandwidths.push_back(1.0 / m);
  }
  return grid;
}

std::string method_name(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::Spco: return "SPCO";
    case SelectionMethod::Cv2: return "CV2";
    case SelectionMethod::Oracle: return "Oracle";
  }
  throw std::logic_error("unreachable");
}

SelectionMethod method_by_name(const std::string& name) {
  if (name == "SPCO" || name == "spco") return SelectionMethod::Spco;
  if (name == "CV2" || name == "cv2") return SelectionMethod::Cv2;
  if (name == "Oracle" || name == "oracle") return SelectionMethod::Oracle;
  throw ConfigError("unknown method '" + name + "'");
}

double penalty(double h, const BandwidthGrid& grid, double lambda,
               const KernelProfile& kernel) {
  if (!grid.contains(h)) {
    throw std::domain_error("penalty: h is not in the grid");
  }
  const double n = static_cast<double>(grid.n);
  const double hmin = grid.h_min();
  const int d = grid.d;
  const double c0_h = c0(kernel, h, d);
  const double c0_m = c0(kernel, hmin, d);
  const double var_h = c0_h * c0_h * c2(kernel, h, d);
  const double var_m = c0_m * c0_m * c2(kernel, hmin, d);
  const double cross = cross_inner(kernel, h, hmin, d);
  return (lambda - 1.0) * var_h / n - var_m / n +
         2.0 * c0_h * c0_m * cross / n;
}

namespace detail {

std::size_t argmin_prefer_last(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::domain_error("argmin of empty table");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[best]) best = i;
  }
  return best;
}

SelectorTables::SelectorTables(Sample& sample, const KernelProfile& kernel)
    : sample_(&sample),
      kernel_(&kernel),
      grid_(build_grid(sample.size(), sample.dim(), kernel)) {
  sample.build_pairwise_cache();
  const std::size_t g = grid_.size();
  const int d = grid_.d;
  const double hmin = grid_.h_min();
  c0s_.resize(g);
  var_.resize(g);
  cross_.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double h = grid_.bandwidths[i];
    c0s_[i] = c0(kernel, h, d);
    var_[i] = c0s_[i] * c0s_[i] * c2(kernel, h, d);
    cross_[i] = cross_inner(kernel, h, hmin, d);
  }
}

std::size_t SelectorTables::n() const { return sample_->size(); }

const std::vector<double>& SelectorTables::self_sums() {
  if (have_selfs_) return selfs_;
  const std::size_t g = grid_.size();
  selfs_.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    selfs_[i] = pair_sum_self(*sample_, grid_.bandwidths[i]);
  }
  have_selfs_ = true;
  return selfs_;
}

const std::vector<double>& SelectorTables::diff_sq_norms() {
  if (have_diff_) return diff_;
  const std::size_t g = grid_.size();
  diff_.assign(g, 0.0);
  const double hmin = grid_.h_min();
  if (kernel_->form() == KernelForm::VonMises && sample_->dim() == 3) {
    const double n2 = static_cast<double>(n()) * static_cast<double>(n());
    const auto& selfs = self_sums();
    for (std::size_t i = 0; i < g; ++i) {
      const double h = grid_.bandwidths[i];
      const double mixed =
          (i == 0) ? selfs[0] : pair_sum_cross(*sample_, h, hmin);
      const double v =
          4.0 * kPi / n2 *
          (c0s_[i] * c0s_[i] * selfs[i] + c0s_[0] * c0s_[0] * selfs[0] -
           2.0 * c0s_[i] * c0s_[0] * mixed);
      diff_[i] = std::max(0.0, v);
    }
  } else {
    FittedEstimator base(*sample_, *kernel_, hmin);
    for (std::size_t i = 0; i < g; ++i) {
      diff_[i] = (i == 0) ? 0.0
                          : FittedEstimator(*sample_, *kernel_,
                                            grid_.bandwidths[i])
                                .diff_sq_norm(base);
    }
  }
  have_diff_ = true;
  return diff_;
}

const std::vector<double>& SelectorTables::sq_norms() {
  if (have_sq_) return sq_;
  const std::size_t g = grid_.size();
  sq_.resize(g);
  if (kernel_->form() == KernelForm::VonMises && sample_->dim() == 3) {
    const double n2 = static_cast<double>(n()) * static_cast<double>(n());
    const auto& selfs = self_sums();
    for (std::size_t i = 0; i < g; ++i) {
      sq_[i] = 4.0 * kPi * c0s_[i] * c0s_[i] * selfs[i] / n2;
    }
  } else {
    for (std::size_t i = 0; i < g; ++i) {
      sq_[i] =
          FittedEstimator(*sample_, *kernel_, grid_.bandwidths[i]).sq_norm();
    }
  }
  have_sq_ = true;
  return sq_;
}

const std::vector<double>& SelectorTables::loo_sums() {
  if (have_loo_) return loo_;
  const std::size_t g = grid_.size();
  loo_.resize(g);
  if (kernel_->form() == KernelForm::VonMises && sample_->dim() == 3) {
    for (std::size_t i = 0; i < g; ++i) {
      loo_[i] = pair_sum_loo(*sample_, grid_.bandwidths[i]);
    }
  } else {
    const std::size_t m = sample_->size();
    for (std::size_t i = 0; i < g; ++i) {
      const double b = 1.0 / (grid_.bandwidths[i] * grid_.bandwidths[i]);
      double acc = 0.0;
      for (std::size_t a = 1; a < m; ++a) {
        for (std::size_t bb = 0; bb < a; ++bb) {
          acc += (*kernel_)((1.0 - sample_->point(a).dot(sample_->point(bb))) *
                            b);
        }
      }
      loo_[i] = 2.0 * acc;
    }
  }
  have_loo_ = true;
  return loo_;
}

const std::vector<double>& SelectorTables::inners(const TargetDensity& target) {
  if (have_inner_) return inner_;
  const std::size_t g = grid_.size();
  inner_.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    inner_[i] = exact_inner(
        FittedEstimator(*sample_, *kernel_, grid_.bandwidths[i]), target);
  }
  target_sq_norm_ = target.exact_sq_norm();
  have_inner_ = true;
  return inner_;
}

double SelectorTables::penalty_at(std::size_t idx, double lambda) const {
  const double n = static_cast<double>(grid_.n);
  return (lambda - 1.0) * var_[idx] / n - var_[0] / n +
         2.0 * c0s_[idx] * c0s_[0] * cross_[idx] / n;
}

std::vector<double> SelectorTables::spco_criterion(double lambda) {
  const auto& diff = diff_sq_norms();
  std::vector<double> crit(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    crit[i] = diff[i] + penalty_at(i, lambda);
  }
  return crit;
}

std::vector<double> SelectorTables::cv2_criterion() {
  if (n() < 2) {
    throw InsufficientDataError("CV2 needs at least two observations");
  }
  const auto& sq = sq_norms();
  const auto& loo = loo_sums();
  const double n_d = static_cast<double>(n());
  std::vector<double> crit(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    crit[i] = sq[i] - 2.0 * c0s_[i] * loo[i] / (n_d * (n_d - 1.0));
  }
  return crit;
}

std::vector<double> SelectorTables::oracle_risks(const TargetDensity& target) {
  const auto& sq = sq_norms();
  const auto& inner = inners(target);
  std::vector<double> risk(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    risk[i] = sq[i] - 2.0 * inner[i] + target_sq_norm_;
  }
  return risk;
}

}  // namespace detail

namespace {

SelectionReport assemble_report(SelectionMethod method, double lambda,
                                detail::SelectorTables& tables,
                                const std::vector<double>& crit,
                                const std::vector<double>* pen,
                                const std::vector<double>* diff,
                                double target_sq_norm) {
  SelectionReport report;
  report.method = method;
  report.lambda = lambda;
  report.grid = tables.grid();
  const std::size_t best = detail::argmin_prefer_last(crit);
  report.chosen_h = tables.grid().bandwidths[best];
  report.table.reserve(crit.size());
  for (std::size_t i = 0; i < crit.size(); ++i) {
    SelectionRow row{tables.grid().bandwidths[i], crit[i], kNaN, kNaN, kNaN};
    if (pen) row.penalty = (*pen)[i];
    if (diff) row.diff_sq_norm = (*diff)[i];
    if (method == SelectionMethod::Oracle) {
      row.risk_shifted = crit[i] - target_sq_norm;
    }
    report.table.push_back(row);
  }
  return report;
}

}  // namespace

SelectionReport spco_select(Sample& sample, const KernelProfile& kernel,
                            double lambda) {
  detail::SelectorTables tables(sample, kernel);
  const std::vector<double> crit = tables.spco_criterion(lambda);
  std::vector<double> pen(crit.size());
  for (std::size_t i = 0; i < crit.size(); ++i) {
    pen[i] = tables.penalty_at(i, lambda);
  }
  const std::vector<double>& diff = tables.diff_sq_norms();
  return assemble_report(SelectionMethod::Spco, lambda, tables, crit, &pen,
                         &diff, 0.0);
}

SelectionReport cv2_select(Sample& sample, const KernelProfile& kernel) {
  detail::SelectorTables tables(sample, kernel);
  const std::vector<double> crit = tables.cv2_criterion();
  return assemble_report(SelectionMethod::Cv2, kNaN, tables, crit, nullptr,
                         nullptr, 0.0);
}

SelectionReport oracle_select(Sample& sample, const KernelProfile& kernel,
                              const TargetDensity& target) {
  detail::SelectorTables tables(sample, kernel);
  const std::vector<double> crit = tables.oracle_risks(target);
  return assemble_report(SelectionMethod::Oracle, kNaN, tables, crit, nullptr,
                         nullptr, target.exact_sq_norm());
}

}  // namespace spherekde
