#pragma once

#include <functional>
#include <string>

namespace spherekde {

enum class KernelForm { VonMises, Generic };

/// Scalar kernel profile K on [0, inf), Assumption-style: bounded,
/// nonnegative, with finite zeroth moment. The von Mises kernel
/// K(x) = e^{-x} carries a tag so bandwidth-dependent constants and the
/// pairwise L2 geometry can take their closed forms on S^2.
class KernelProfile {
public:
  static KernelProfile von_mises();

  /// Wrap an arbitrary profile. Probes a grid to find the sup-norm and a tail
  /// cutoff (first abscissa past which K < 1e-16 * sup), rejects profiles
  /// that go negative on the probe grid or whose zeroth moment does not
  /// converge.
  static KernelProfile generic(std::string name,
                               std::function<double(double)> profile);

  double operator()(double x) const { return profile_(x); }
  double sup_norm() const { return sup_norm_; }
  double tail_cutoff() const { return tail_cutoff_; }
  KernelForm form() const { return form_; }
  const std::string& name() const { return name_; }

private:
  KernelProfile(std::string name, std::function<double(double)> profile,
                double sup_norm, double tail_cutoff, KernelForm form);

  std::string name_;
  std::function<double(double)> profile_;
  double sup_norm_;
  double tail_cutoff_;
  KernelForm form_;
};

/// Lookup by CLI name; only "vonmises" is available by name, other kernels
/// enter programmatically.
KernelProfile kernel_by_name(const std::string& name);

/// alpha_i(K) = int_0^inf x^{(i+d-3)/2} K(x) dx, i even.
/// Adaptive quadrature over [0, tail_cutoff] plus a tail estimate; throws
/// MomentError when the tail is not negligible (divergent moment).
double alpha_moment(const KernelProfile& kernel, int i, int d);

/// Grid and variance constants of a kernel in dimension d.
struct KernelConstants {
  int d;
  double alpha0;  // alpha_0(K)
  double r0;      // R_0(K) = 2^{(d-3)/2} sigma_{d-2} alpha_0(K)
  double r1;      // R_1(K) = 2^{(d-3)/2} sigma_{d-2} int x^{(d-3)/2} K^2
};

KernelConstants kernel_constants(const KernelProfile& kernel, int d);

/// Normalizer c_0(h): 1 / int_{S^{d-1}} K((1 - x.y)/h^2) w(dy).
double c0(const KernelProfile& kernel, double h, int d);

/// c_2(h) = int_{S^{d-1}} K^2((1 - x.y)/h^2) w(dy).
double c2(const KernelProfile& kernel, double h, int d);

/// <K_{h^2}, K_{h2^2}> without c_0 factors:
/// int_{S^{d-1}} K((1-x.y)/h^2) K((1-x.y)/h2^2) w(dy).
double cross_inner(const KernelProfile& kernel, double h, double h2, int d);

namespace detail {
/// Adaptive Gauss-Kronrod on [a, b] (absolute tolerance); used by the
/// generic-kernel paths and exposed for tests.
double integrate_qag(const std::function<double(double)>& f, double a,
                     double b, double abs_tol);
}  // namespace detail

}  // namespace spherekde
