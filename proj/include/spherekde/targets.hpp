#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spherekde/estimator.hpp"
#include "spherekde/geometry.hpp"

namespace spherekde {

/// One von Mises-Fisher component on S^2: density w C_k e^{kappa x.mu} with
/// C_k = kappa / (2 pi (e^kappa - e^{-kappa})).
struct VmfComponent {
  double kappa;
  UnitVector mu;
  double weight;
};

/// Mixture of vMF components with weights summing to one. Provides the exact
/// density, a seeded exact sampler (inverse-CDF in the polar coordinate, no
/// rejection), and closed-form L2 functionals for oracle risks.
class TargetDensity {
public:
  explicit TargetDensity(std::vector<VmfComponent> components);

  /// kappa = 2, mu = (1,0,0).
  static TargetDensity f1vm();
  /// 4/5 vMF(2, (1,0,0)) + 1/5 vMF(0.7, (-1,0,0)).
  static TargetDensity f2vm();
  /// "f1vm" | "f2vm".
  static TargetDensity by_name(const std::string& name);
  /// Array of {kappa, mu: [x,y,z], weight}.
  static TargetDensity from_json(const nlohmann::json& spec);

  double density(const UnitVector& x) const;

  /// n i.i.d. draws; identical bytes for identical (n, seed).
  Sample sample(std::size_t n, std::uint64_t seed) const;

  /// ||f||^2 via int_{S^2} e^{v.x} w(dx) = 4 pi sinh||v|| / ||v||.
  double exact_sq_norm() const;

  const std::vector<VmfComponent>& components() const { return components_; }

private:
  std::vector<VmfComponent> components_;
  std::vector<double> scaled_norm_;  // kappa / (2 pi (1 - e^{-2 kappa}))
  std::vector<Eigen::MatrixXd> rotations_;
};

/// <f_hat_h, f> in closed form for the von Mises kernel on S^2 (quadrature
/// fallback otherwise).
double exact_inner(const FittedEstimator& estimator,
                   const TargetDensity& target);

}  // namespace spherekde
