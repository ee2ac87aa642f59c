#include "spherekde/kernel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "spherekde/errors.hpp"
#include "spherekde/geometry.hpp"
#include "spherekde/stable.hpp"

namespace spherekde {

namespace {

constexpr double kPi = std::numbers::pi;

[[maybe_unused]] const bool kGslHandlerOff = [] {
  gsl_set_error_handler_off();
  return true;
}();

struct ProbeResult {
  double sup_norm;
  double tail_cutoff;
};

// Linear grid on [0, 32] then geometric up to ~1e8. The cutoff is the last
// abscissa where K >= 1e-16 * sup, stretched by one geometric step.
ProbeResult probe_profile(const std::function<double(double)>& profile) {
  std::vector<double> xs;
  for (int j = 0; j <= 1024; ++j) xs.push_back(j * (32.0 / 1024.0));
  for (double x = 32.0 * 1.2; x < 1e8; x *= 1.2) xs.push_back(x);

  double sup = 0.0;
  for (double x : xs) {
    const double v = profile(x);
    if (std::isnan(v)) throw std::domain_error("kernel profile returned NaN");
    if (v < 0.0) {
      throw std::domain_error("kernel profile is negative at x=" +
                              std::to_string(x));
    }
    sup = std::max(sup, v);
  }
  if (!(sup > 0.0)) {
    throw std::domain_error("kernel profile is identically zero on probes");
  }
  double cutoff = xs.back();
  for (std::size_t k = xs.size(); k-- > 0;) {
    if (profile(xs[k]) >= 1e-16 * sup) {
      cutoff = std::min(xs[k] * 1.2, xs.back());
      break;
    }
  }
  return {sup, cutoff};
}

}  // namespace

namespace detail {

double integrate_qag(const std::function<double(double)>& f, double a,
                     double b, double abs_tol) {
  struct Ctx {
    const std::function<double(double)>* fn;
  } ctx{&f};
  gsl_function gf;
  gf.function = [](double x, void* p) -> double {
    return (*static_cast<Ctx*>(p)->fn)(x);
  };
  gf.params = &ctx;

  constexpr std::size_t kLimit = 2000;
  std::unique_ptr<gsl_integration_workspace,
                  decltype(&gsl_integration_workspace_free)>
      ws(gsl_integration_workspace_alloc(kLimit),
         &gsl_integration_workspace_free);

  double result = 0.0;
  double abserr = 0.0;
  const int status =
      gsl_integration_qag(&gf, a, b, abs_tol, 1e-10, kLimit,
                          GSL_INTEG_GAUSS61, ws.get(), &result, &abserr);
  if (status != GSL_SUCCESS) {
    throw MomentError("quadrature failed to converge on [" +
                      std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return result;
}

}  // namespace detail

KernelProfile::KernelProfile(std::string name,
                             std::function<double(double)> profile,
                             double sup_norm, double tail_cutoff,
                             KernelForm form)
    : name_(std::move(name)),
      profile_(std::move(profile)),
      sup_norm_(sup_norm),
      tail_cutoff_(tail_cutoff),
      form_(form) {}

KernelProfile KernelProfile::von_mises() {
  auto profile = [](double x) { return std::exp(-x); };
  const ProbeResult probe = probe_profile(profile);
  return KernelProfile("vonmises", profile, probe.sup_norm, probe.tail_cutoff,
                       KernelForm::VonMises);
}

KernelProfile KernelProfile::generic(std::string name,
                                     std::function<double(double)> profile) {
  const ProbeResult probe = probe_profile(profile);
  KernelProfile k(std::move(name), std::move(profile), probe.sup_norm,
                  probe.tail_cutoff, KernelForm::Generic);
  const double a0 = alpha_moment(k, 0, 3);  // rejects divergent profiles
  if (!(a0 > 0.0)) {
    throw std::domain_error("kernel profile has zero mass");
  }
  return k;
}

KernelProfile kernel_by_name(const std::string& name) {
  if (name == "vonmises") return KernelProfile::von_mises();
  throw ConfigError("unknown kernel '" + name +
                    "' (only \"vonmises\" is selectable by name)");
}

double alpha_moment(const KernelProfile& kernel, int i, int d) {
  if (i < 0 || d < 3) {
    throw std::domain_error("alpha_moment: need i >= 0 and d >= 3");
  }
  const double p = 0.5 * (i + d - 3);
  auto integrand = [&](double x) {
    return (p == 0.0 ? 1.0 : std::pow(x, p)) * kernel(x);
  };
  const double t = kernel.tail_cutoff();
  const double main = detail::integrate_qag(integrand, 0.0, t, 1e-12);
  // Tail estimate over [T, 4T], added to the result. Divergent moments leave
  // a tail chunk comparable to the head (log-divergence already shows up at
  // the percent level), while admissible kernels leave dust.
  const double tail = detail::integrate_qag(integrand, t, 4.0 * t, 1e-12);
  if (std::abs(tail) > std::max(1e-12, 1e-3 * std::abs(main))) {
    throw MomentError("alpha_moment(i=" + std::to_string(i) +
                      "): tail is not negligible, moment looks divergent");
  }
  return main + tail;
}

KernelConstants kernel_constants(const KernelProfile& kernel, int d) {
  if (d < 3) throw std::domain_error("kernel_constants: d must be >= 3");
  const double scale = std::pow(2.0, 0.5 * (d - 3)) * surface_area(d - 1);
  const double alpha0 = alpha_moment(kernel, 0, d);
  const double p = 0.5 * (d - 3);
  auto sq = [&](double x) {
    const double kx = kernel(x);
    return (p == 0.0 ? 1.0 : std::pow(x, p)) * kx * kx;
  };
  const double m2 =
      detail::integrate_qag(sq, 0.0, kernel.tail_cutoff(), 1e-12);
  return KernelConstants{d, alpha0, scale * alpha0, scale * m2};
}

namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0) || h > 1.0) {
    throw std::domain_error("bandwidth must lie in (0, 1]");
  }
}

// sigma_{d-2} int_{-1}^{1} K((1-t)/h^2) g((1-t)/h2^2) (1-t^2)^{(d-3)/2} dt
// via the substitution u = (1-t) * a with a = 1/h^2 + 1/h2^2, which keeps the
// integrand resolvable however small the bandwidths get.
double zonal_pair_integral(const std::function<double(double)>& f,
                           const std::function<double(double)>& g, double h,
                           double h2, double tail, int d) {
  const double b1 = 1.0 / (h * h);
  const double b2 = 1.0 / (h2 * h2);
  const double a = b1 + b2;
  const double upper = std::min(2.0 * a, tail * a / std::max(b1, b2));
  const double p = 0.5 * (d - 3);
  auto integrand = [&](double u) {
    double v = f(u * b1 / a) * g(u * b2 / a);
    if (p != 0.0) {
      const double s = u / a;  // s = 1 - t in [0, 2]
      v *= std::pow(std::max(0.0, s * (2.0 - s)), p);
    }
    return v;
  };
  return surface_area(d - 1) *
         detail::integrate_qag(integrand, 0.0, upper, 1e-12) / a;
}

}  // namespace

double c0(const KernelProfile& kernel, double h, int d) {
  check_bandwidth(h);
  if (kernel.form() == KernelForm::VonMises && d == 3) {
    return 1.0 / (2.0 * kPi * h * h * one_minus_exp(2.0 / (h * h)));
  }
  const double b = 1.0 / (h * h);
  const double upper = std::min(2.0 * b, kernel.tail_cutoff());
  const double p = 0.5 * (d - 3);
  auto integrand = [&](double u) {
    double v = kernel(u);
    if (p != 0.0) {
      const double s = u / b;
      v *= std::pow(std::max(0.0, s * (2.0 - s)), p);
    }
    return v;
  };
  const double inv =
      surface_area(d - 1) * detail::integrate_qag(integrand, 0.0, upper, 1e-12) / b;
  if (!(inv > 0.0)) throw std::domain_error("c0: kernel mass vanished");
  return 1.0 / inv;
}

double c2(const KernelProfile& kernel, double h, int d) {
  check_bandwidth(h);
  if (kernel.form() == KernelForm::VonMises && d == 3) {
    return kPi * h * h * one_minus_exp(4.0 / (h * h));
  }
  auto k = [&](double x) { return kernel(x); };
  return zonal_pair_integral(k, k, h, h, kernel.tail_cutoff(), d);
}

double cross_inner(const KernelProfile& kernel, double h, double h2, int d) {
  check_bandwidth(h);
  check_bandwidth(h2);
  if (kernel.form() == KernelForm::VonMises && d == 3) {
    const double a = 1.0 / (h * h) + 1.0 / (h2 * h2);
    return 2.0 * kPi * one_minus_exp(2.0 * a) / a;
  }
  auto k = [&](double x) { return kernel(x); };
  return zonal_pair_integral(k, k, h, h2, kernel.tail_cutoff(), d);
}

}  // namespace spherekde
