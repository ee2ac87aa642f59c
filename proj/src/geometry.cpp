#include "spherekde/geometry.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace spherekde {

namespace {
constexpr double kPi = std::numbers::pi;
}

UnitVector::UnitVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 3) {
    throw std::domain_error("UnitVector: dimension must be >= 3");
  }
  const double norm = coords_.norm();
  if (!(norm > 1e-300)) {
    throw std::domain_error("UnitVector: cannot normalize a zero vector");
  }
  coords_ /= norm;
}

UnitVector UnitVector::north_pole(int d) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e[d - 1] = 1.0;
  return UnitVector(std::move(e));
}

double surface_area(int d) {
  if (d < 2) {
    throw std::domain_error("surface_area: d must be >= 2");
  }
  return 2.0 * std::pow(kPi, 0.5 * d) / gsl_sf_gamma(0.5 * d);
}

UnitVector normalize(const Eigen::VectorXd& raw) { return UnitVector(raw); }

Eigen::MatrixXd rotation_onto(const UnitVector& mu) {
  const int d = mu.dim();
  Eigen::VectorXd v = -mu.coords();
  v[d - 1] += 1.0;  // v = e_d - mu
  const double vv = v.squaredNorm();
  if (vv < 1e-30) {
    return Eigen::MatrixXd::Identity(d, d);
  }
  // Householder reflection swapping e_d and mu.
  return Eigen::MatrixXd::Identity(d, d) - (2.0 / vv) * (v * v.transpose());
}

SphereQuadrature::SphereQuadrature(std::vector<UnitVector> nodes,
                                   std::vector<double> weights, int resolution)
    : nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      resolution_(resolution) {
  if (nodes_.size() != weights_.size()) {
    throw std::invalid_argument("SphereQuadrature: nodes/weights mismatch");
  }
}

SphereQuadrature product_quadrature_s2(int n_t, int n_phi) {
  if (n_t < 2 || n_phi < 2) {
    throw std::domain_error("product_quadrature_s2: resolutions must be >= 2");
  }
  gsl_integration_glfixed_table* table =
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n_t));

  std::vector<UnitVector> nodes;
  std::vector<double> weights;
  nodes.reserve(static_cast<std::size_t>(n_t) * n_phi);
  weights.reserve(static_cast<std::size_t>(n_t) * n_phi);

  const double w_phi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_t; ++i) {
    double t = 0.0;
    double w_t = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &t,
                                  &w_t, table);
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = w_phi * j;
      Eigen::VectorXd x(3);
      x << s * std::cos(phi), s * std::sin(phi), t;
      nodes.emplace_back(std::move(x));
      weights.push_back(w_t * w_phi);
    }
  }
  gsl_integration_glfixed_table_free(table);
  return SphereQuadrature(std::move(nodes), std::move(weights), n_t);
}

}  // namespace spherekde
