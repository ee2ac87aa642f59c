#include "spherekde/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "spherekde/errors.hpp"
#include "spherekde/stable.hpp"

namespace spherekde {

namespace {

constexpr double kPi = std::numbers::pi;

// Terms with exponent below -kCut relative to the diagonal contribute less
// than ~1e-16 of any pair sum (see pair_sum_* notes in the header).
constexpr double kCut = 55.0;

std::size_t tri_index(std::size_t i, std::size_t j) {
  // i > j
  return i * (i - 1) / 2 + j;
}

}  // namespace

Sample::Sample(std::vector<UnitVector> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw std::domain_error("Sample: need at least one point");
  }
  d_ = points_.front().dim();
  for (const auto& p : points_) {
    if (p.dim() != d_) {
      throw std::domain_error("Sample: points of mixed dimension");
    }
  }
}

void Sample::build_pairwise_cache() {
  if (cache_built_) return;
  const std::size_t n = points_.size();
  pair_r_.resize(n * (n - 1) / 2);
  for (std::size_t i = 1; i < n; ++i) {
    const Eigen::VectorXd& xi = points_[i].coords();
    for (std::size_t j = 0; j < i; ++j) {
      const double t = xi.dot(points_[j].coords());
      pair_r_[tri_index(i, j)] =
          std::sqrt(std::max(0.0, 2.0 + 2.0 * std::min(1.0, t)));
    }
  }
  pair_r_sorted_ = pair_r_;
  std::sort(pair_r_sorted_.begin(), pair_r_sorted_.end(),
            std::greater<double>());
  cache_built_ = true;
}

double Sample::pair_r(std::size_t i, std::size_t j) const {
  if (i >= points_.size() || j >= points_.size()) {
    throw std::out_of_range("Sample::pair_r index out of range");
  }
  if (i == j) return 2.0;
  if (cache_built_) {
    return i > j ? pair_r_[tri_index(i, j)] : pair_r_[tri_index(j, i)];
  }
  const double t = points_[i].dot(points_[j]);
  return std::sqrt(std::max(0.0, 2.0 + 2.0 * std::min(1.0, t)));
}

const std::vector<double>& Sample::pair_r_sorted_desc() const {
  if (!cache_built_) {
    throw std::logic_error("pair_r_sorted_desc: cache not built");
  }
  return pair_r_sorted_;
}

namespace detail {

double pair_sum_self(const Sample& sample, double h) {
  const std::size_t n = sample.size();
  const double b = 1.0 / (h * h);
  double acc = static_cast<double>(n) * scaled_sinhc(2.0 * b, 2.0 * b);
  const double r_min = 2.0 - kCut / b;  // skip pairs with (2-r) b > kCut

  auto term = [&](double r) { return scaled_sinhc(2.0 * b, r * b); };

  if (sample.has_pairwise_cache()) {
    const auto& rs = sample.pair_r_sorted_desc();
    auto end = rs.end();
    if (r_min > 0.0) {
      end = std::partition_point(rs.begin(), rs.end(),
                                 [&](double r) { return r >= r_min; });
    }
    double off = 0.0;
    for (auto it = rs.begin(); it != end; ++it) off += term(*it);
    return acc + 2.0 * off;
  }
  double off = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double r = sample.pair_r(i, j);
      if (r >= r_min) off += term(r);
    }
  }
  return acc + 2.0 * off;
}

double pair_sum_cross(const Sample& sample, double h, double h2) {
  const std::size_t n = sample.size();
  const double b = 1.0 / (h * h);
  const double c = 1.0 / (h2 * h2);
  const double a = b + c;
  double acc = static_cast<double>(n) * scaled_sinhc(a, a);

  // rho^2 = (b+c)^2 - b c (4 - r^2); for a > kCut the exponent a - rho
  // exceeds kCut once r^2 < 4 - kCut (2a - kCut) / (b c).
  double r_min = 0.0;
  if (a > kCut) {
    const double r2_thresh = 4.0 - kCut * (2.0 * a - kCut) / (b * c);
    if (r2_thresh > 0.0) r_min = std::sqrt(r2_thresh);
  }

  auto term = [&](double r) {
    const double rho2 = a * a - b * c * (4.0 - r * r);
    return scaled_sinhc(a, std::sqrt(std::max(0.0, rho2)));
  };

  if (sample.has_pairwise_cache()) {
    const auto& rs = sample.pair_r_sorted_desc();
    auto end = rs.end();
    if (r_min > 0.0) {
      end = std::partition_point(rs.begin(), rs.end(),
                                 [&](double r) { return r >= r_min; });
    }
    double off = 0.0;
    for (auto it = rs.begin(); it != end; ++it) off += term(*it);
    return acc + 2.0 * off;
  }
  double off = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double r = sample.pair_r(i, j);
      if (r >= r_min) off += term(r);
    }
  }
  return acc + 2.0 * off;
}

double pair_sum_loo(const Sample& sample, double h) {
  const std::size_t n = sample.size();
  const double b = 1.0 / (h * h);
  // 1 - X_i.X_j = (4 - r^2)/2; skip once (4 - r^2) b / 2 > kCut.
  double r_min = 0.0;
  const double r2_thresh = 4.0 - 2.0 * kCut / b;
  if (r2_thresh > 0.0) r_min = std::sqrt(r2_thresh);

  auto term = [&](double r) { return std::exp(-0.5 * (4.0 - r * r) * b); };

  if (sample.has_pairwise_cache()) {
    const auto& rs = sample.pair_r_sorted_desc();
    auto end = rs.end();
    if (r_min > 0.0) {
      end = std::partition_point(rs.begin(), rs.end(),
                                 [&](double r) { return r >= r_min; });
    }
    double acc = 0.0;
    for (auto it = rs.begin(); it != end; ++it) acc += term(*it);
    return 2.0 * acc;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double r = sample.pair_r(i, j);
      if (r >= r_min) acc += term(r);
    }
  }
  return 2.0 * acc;
}

}  // namespace detail

FittedEstimator::FittedEstimator(const Sample& sample, KernelProfile kernel,
                                 double h)
    : sample_(&sample),
      kernel_(std::move(kernel)),
      h_(h),
      c0_(spherekde::c0(kernel_, h, sample.dim())) {}

double FittedEstimator::evaluate(const UnitVector& x) const {
  if (x.dim() != sample_->dim()) {
    throw std::domain_error("evaluate: dimension mismatch");
  }
  const double inv_h2 = 1.0 / (h_ * h_);
  double acc = 0.0;
  for (const auto& xi : sample_->points()) {
    acc += kernel_((1.0 - x.dot(xi)) * inv_h2);
  }
  return c0_ * acc / static_cast<double>(sample_->size());
}

double FittedEstimator::loo_evaluate(std::size_t i, const UnitVector& x) const {
  const std::size_t n = sample_->size();
  if (n < 2) {
    throw InsufficientDataError("loo_evaluate: need at least two points");
  }
  if (i >= n) {
    throw std::out_of_range("loo_evaluate: index out of range");
  }
  if (x.dim() != sample_->dim()) {
    throw std::domain_error("loo_evaluate: dimension mismatch");
  }
  const double inv_h2 = 1.0 / (h_ * h_);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    acc += kernel_((1.0 - x.dot(sample_->point(j))) * inv_h2);
  }
  return c0_ * acc / static_cast<double>(n - 1);
}

double FittedEstimator::sq_norm() const {
  const std::size_t n = sample_->size();
  if (kernel_.form() == KernelForm::VonMises && sample_->dim() == 3) {
    const double s = detail::pair_sum_self(*sample_, h_);
    return 4.0 * kPi * c0_ * c0_ * s / (static_cast<double>(n) * n);
  }
  if (sample_->dim() != 3) {
    throw std::domain_error(
        "sq_norm: only d = 3 is supported (closed form or quadrature)");
  }
  const SphereQuadrature quad = product_quadrature_s2(
      kDefaultQuadratureResolution, kDefaultQuadratureResolution);
  return quad.integrate([&](const UnitVector& x) {
    const double v = evaluate(x);
    return v * v;
  });
}

double FittedEstimator::diff_sq_norm(const FittedEstimator& other) const {
  if (sample_ != other.sample_) {
    throw std::domain_error("diff_sq_norm: estimators on different samples");
  }
  if (kernel_.name() != other.kernel_.name()) {
    throw std::domain_error("diff_sq_norm: estimators with different kernels");
  }
  const std::size_t n = sample_->size();
  if (kernel_.form() == KernelForm::VonMises && sample_->dim() == 3) {
    const double n2 = static_cast<double>(n) * n;
    const double self_a = detail::pair_sum_self(*sample_, h_);
    const double self_b = detail::pair_sum_self(*sample_, other.h_);
    const double mixed = detail::pair_sum_cross(*sample_, h_, other.h_);
    const double v = 4.0 * kPi / n2 *
                     (c0_ * c0_ * self_a + other.c0_ * other.c0_ * self_b -
                      2.0 * c0_ * other.c0_ * mixed);
    return std::max(0.0, v);
  }
  if (sample_->dim() != 3) {
    throw std::domain_error(
        "diff_sq_norm: only d = 3 is supported (closed form or quadrature)");
  }
  const SphereQuadrature quad = product_quadrature_s2(
      kDefaultQuadratureResolution, kDefaultQuadratureResolution);
  return std::max(0.0, quad.integrate([&](const UnitVector& x) {
    const double v = evaluate(x) - other.evaluate(x);
    return v * v;
  }));
}

}  // namespace spherekde
