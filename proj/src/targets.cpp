#include "spherekde/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "spherekde/errors.hpp"
#include "spherekde/rng.hpp"
#include "spherekde/stable.hpp"

namespace spherekde {

namespace {
constexpr double kPi = std::numbers::pi;
}

TargetDensity::TargetDensity(std::vector<VmfComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::domain_error("TargetDensity: need at least one component");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.kappa > 0.0)) {
      throw std::domain_error("TargetDensity: kappa must be positive");
    }
    if (!(c.weight > 0.0) || c.weight > 1.0) {
      throw std::domain_error("TargetDensity: weight must lie in (0, 1]");
    }
    if (c.mu.dim() != 3) {
      throw std::domain_error("TargetDensity: components live on S^2");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::domain_error("TargetDensity: weights must sum to 1");
  }
  for (const auto& c : components_) {
    // C_k = kappa e^{-kappa} / (2 pi (1 - e^{-2 kappa})); the e^{-kappa} is
    // folded into the exponent when evaluating, keeping exponents <= 0.
    scaled_norm_.push_back(c.kappa /
                           (2.0 * kPi * one_minus_exp(2.0 * c.kappa)));
    rotations_.push_back(rotation_onto(c.mu));
  }
}

TargetDensity TargetDensity::f1vm() {
  Eigen::VectorXd mu(3);
  mu << 1.0, 0.0, 0.0;
  return TargetDensity({VmfComponent{2.0, UnitVector(mu), 1.0}});
}

TargetDensity TargetDensity::f2vm() {
  Eigen::VectorXd mu1(3), mu2(3);
  mu1 << 1.0, 0.0, 0.0;
  mu2 << -1.0, 0.0, 0.0;
  return TargetDensity({VmfComponent{2.0, UnitVector(mu1), 0.8},
                        VmfComponent{0.7, UnitVector(mu2), 0.2}});
}

TargetDensity TargetDensity::by_name(const std::string& name) {
  if (name == "f1vm") return f1vm();
  if (name == "f2vm") return f2vm();
  throw ConfigError("unknown target '" + name + "'");
}

TargetDensity TargetDensity::from_json(const nlohmann::json& spec) {
  if (!spec.is_array() || spec.empty()) {
    throw ParseError("target spec: expected a non-empty array of components");
  }
  std::vector<VmfComponent> comps;
  for (const auto& item : spec) {
    if (!item.contains("kappa") || !item.contains("mu") ||
        !item.contains("weight")) {
      throw ParseError("target spec: component needs kappa, mu, weight");
    }
    const auto& mu = item.at("mu");
    if (!mu.is_array() || mu.size() != 3) {
      throw ParseError("target spec: mu must be [x, y, z]");
    }
    Eigen::VectorXd m(3);
    m << mu[0].get<double>(), mu[1].get<double>(), mu[2].get<double>();
    comps.push_back(VmfComponent{item.at("kappa").get<double>(), UnitVector(m),
                                 item.at("weight").get<double>()});
  }
  return TargetDensity(std::move(comps));
}

double TargetDensity::density(const UnitVector& x) const {
  if (x.dim() != 3) {
    throw std::domain_error("density: point must lie on S^2");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    acc += c.weight * scaled_norm_[k] *
           std::exp(c.kappa * (x.dot(c.mu) - 1.0));
  }
  return acc;
}

Sample TargetDensity::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) {
    throw std::domain_error("sample: n must be positive");
  }
  Rng rng(seed);
  std::vector<UnitVector> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Component by weight.
    std::size_t k = 0;
    double u = rng.uniform();
    for (; k + 1 < components_.size(); ++k) {
      if (u < components_[k].weight) break;
      u -= components_[k].weight;
    }
    const double kappa = components_[k].kappa;

    // Polar coordinate w = x.mu by exact inversion:
    // w = 1 + log(u + (1-u) e^{-2 kappa}) / kappa, written with log1p so the
    // kappa -> 0 limit degrades gracefully to the uniform 2u - 1.
    const double uw = rng.uniform();
    const double em = one_minus_exp(2.0 * kappa);
    const double w =
        std::clamp(1.0 + std::log1p(-(1.0 - uw) * em) / kappa, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    const double phi = 2.0 * kPi * rng.uniform();

    Eigen::VectorXd local(3);
    local << s * std::cos(phi), s * std::sin(phi), w;
    points.emplace_back(UnitVector(rotations_[k] * local));
  }
  return Sample(std::move(points));
}

double TargetDensity::exact_sq_norm() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    for (std::size_t l = 0; l < components_.size(); ++l) {
      const auto& ck = components_[k];
      const auto& cl = components_[l];
      const double rho =
          (ck.kappa * ck.mu.coords() + cl.kappa * cl.mu.coords()).norm();
      acc += ck.weight * cl.weight * scaled_norm_[k] * scaled_norm_[l] *
             4.0 * kPi * scaled_sinhc(ck.kappa + cl.kappa, rho);
    }
  }
  return acc;
}

double exact_inner(const FittedEstimator& estimator,
                   const TargetDensity& target) {
  const Sample& sample = estimator.sample();
  if (sample.dim() != 3) {
    throw std::domain_error("exact_inner: only d = 3 is supported");
  }
  if (estimator.kernel().form() != KernelForm::VonMises) {
    const SphereQuadrature quad = product_quadrature_s2(
        kDefaultQuadratureResolution, kDefaultQuadratureResolution);
    return quad.integrate([&](const UnitVector& x) {
      return estimator.evaluate(x) * target.density(x);
    });
  }
  const double b = 1.0 / (estimator.h() * estimator.h());
  double acc = 0.0;
  for (const auto& c : target.components()) {
    const double norm_k =
        c.kappa / (2.0 * kPi * one_minus_exp(2.0 * c.kappa));
    const Eigen::Vector3d kmu = c.kappa * c.mu.coords();
    double comp = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double rho = (b * sample.point(i).coords() + kmu).norm();
      comp += scaled_sinhc(b + c.kappa, rho);
    }
    acc += c.weight * norm_k * 4.0 * kPi * comp;
  }
  return estimator.c0() * acc / static_cast<double>(sample.size());
}

}  // namespace spherekde
