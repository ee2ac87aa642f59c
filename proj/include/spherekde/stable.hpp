#pragma once

#include <cmath>

namespace spherekde {

/// e^{-s} * sinh(rho) / rho for s >= 0, rho >= 0.
///
/// Every spherical exponential integral in this library reduces to this form
/// with rho <= s + O(1), so no intermediate value ever overflows. Small rho
/// goes through expm1 (the plain difference of exponentials cancels), tiny
/// rho through the Taylor expansion of sinh(rho)/rho.
inline double scaled_sinhc(double s, double rho) {
  if (rho < 1e-8) {
    return std::exp(-s) * (1.0 + rho * rho / 6.0);
  }
  if (rho <= 0.5) {
    return std::exp(-s) * (std::expm1(rho) - std::expm1(-rho)) / (2.0 * rho);
  }
  return (std::exp(rho - s) - std::exp(-rho - s)) / (2.0 * rho);
}

/// 1 - e^{-x} for x >= 0, without cancellation near x = 0.
inline double one_minus_exp(double x) { return -std::expm1(-x); }

}  // namespace spherekde
