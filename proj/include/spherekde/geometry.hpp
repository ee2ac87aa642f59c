#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace spherekde {

/// A point on S^{d-1}, d >= 3. Construction normalizes the input, so
/// finite-precision coordinates from data files are accepted as-is; a
/// (near-)zero vector is rejected.
class UnitVector {
public:
  explicit UnitVector(Eigen::VectorXd coords);

  static UnitVector north_pole(int d);

  int dim() const { return static_cast<int>(coords_.size()); }
  const Eigen::VectorXd& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  double dot(const UnitVector& other) const {
    return coords_.dot(other.coords_);
  }

private:
  Eigen::VectorXd coords_;
};

/// Area of S^{d-1}: sigma_{d-1} = 2 pi^{d/2} / Gamma(d/2).
double surface_area(int d);

/// raw / ||raw||; throws std::domain_error on (near-)zero input.
UnitVector normalize(const Eigen::VectorXd& raw);

/// Orthogonal R with R e_d = mu (e_d the north pole). Householder
/// reflection, so R is exactly orthogonal up to rounding.
Eigen::MatrixXd rotation_onto(const UnitVector& mu);

/// Fixed node/weight rule on S^2. Weights sum to 4 pi by construction.
class SphereQuadrature {
public:
  SphereQuadrature(std::vector<UnitVector> nodes, std::vector<double> weights,
                   int resolution);

  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      acc += weights_[k] * f(nodes_[k]);
    }
    return acc;
  }

  const std::vector<UnitVector>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  int resolution() const { return resolution_; }
  std::size_t size() const { return nodes_.size(); }

private:
  std::vector<UnitVector> nodes_;
  std::vector<double> weights_;
  int resolution_;
};

/// Gauss-Legendre in the polar variable t in [-1,1] times an equispaced
/// trapezoid in azimuth: exact for polynomials in t of degree <= 2 n_t - 1
/// and for trigonometric polynomials in the angle up to order n_phi - 1.
SphereQuadrature product_quadrature_s2(int n_t, int n_phi);

/// Default resolution of the reference rule (per axis).
inline constexpr int kDefaultQuadratureResolution = 64;

}  // namespace spherekde
