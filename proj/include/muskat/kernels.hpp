// Periodized kernels.  With a = 2 pi s / P, b = 2 pi |d| / P and
// D = sinh^2(b/2) + sin^2(a/2) the cotangent identity sum_j 1/(z + j) = pi cot(pi z)
// gives
//
//   sum_j 1/((s+jP)^2 + d^2)      = (pi/P)^2 * (sinh b / b) / D
//   sum_j (s+jP)/((s+jP)^2 + d^2) = (pi/P) * sin a / (2 D)        (paired sum)
//
// and the squared-denominator kernels follow from -(1/2d) d/dd of these.
// For b > kLargeB the sinh/cosh are rewritten in E = exp(-b) to avoid overflow.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "muskat/error.hpp"

namespace muskat::kernels {

inline constexpr double kLargeB = 20.0;

namespace detail {

inline double sinhc(double b) noexcept { return std::abs(b) < 1e-8 ? 1.0 : std::sinh(b) / b; }

/// (b cosh b - sinh b) / b^3, i.e. (d/db sinhc(b)) / b.
inline double sinhc_slope(double b) noexcept {
  if (std::abs(b) < 0.5) {
    // sum_{n>=1} 2n b^{2n-2} / (2n+1)!
    const double b2 = b * b;
    double term = 1.0 / 3.0;  // n = 1
    double sum = term;
    for (int n = 2; n <= 9; ++n) {
      term *= b2 * static_cast<double>(n) / (static_cast<double>(n - 1) * (2.0 * n) * (2.0 * n + 1.0));
      sum += term;
    }
    return sum;
  }
  return (b * std::cosh(b) - std::sinh(b)) / (b * b * b);
}

inline double reduce(double s, double period) noexcept { return std::remainder(s, period); }

inline void check_singular(double s_red, double d) {
  if (d == 0.0 && s_red == 0.0) {
    throw InvalidArgument("periodized kernel evaluated at its singular point (s = 0 mod P, d = 0)");
  }
}

}  // namespace detail

/// Trigonometric pieces of a quadrature offset s, reusable across many d.
struct Phase {
  double sin_a = 0.0;       // sin(2 pi s / P)
  double cos_a = 1.0;       // cos(2 pi s / P)
  double sin_half_sq = 0.0; // sin^2(pi s / P)
  bool at_origin = false;   // s == 0 (mod P)

  static Phase of(double s, double period) noexcept {
    const double sr = detail::reduce(s, period);
    const double a = 2.0 * std::numbers::pi * sr / period;
    const double sh = std::sin(0.5 * a);
    return Phase{std::sin(a), std::cos(a), sh * sh, sr == 0.0};
  }
};

/// All four periodized kernels at one (s, d), sharing the transcendental work.
struct KernelValues {
  double poisson = 0.0;   // sum 1/(z^2+d^2)
  double flux = 0.0;      // sum z/(z^2+d^2)
  double poisson2 = 0.0;  // sum 1/(z^2+d^2)^2
  double flux2 = 0.0;     // sum z/(z^2+d^2)^2
};

/// First-order kernels only (the hot path of every m = 1 sweep).
inline void eval_first(const Phase& ph, double d, double period, double& poisson, double& flux) {
  const double pi = std::numbers::pi;
  const double b = 2.0 * pi * std::abs(d) / period;
  if (b <= kLargeB) {
    const double sh = std::sinh(0.5 * b);
    const double D = sh * sh + ph.sin_half_sq;
    poisson = (pi * pi / (period * period)) * detail::sinhc(b) / D;
    flux = (pi / period) * ph.sin_a / (2.0 * D);
  } else {
    const double E = std::exp(-b);
    const double G = 1.0 - 2.0 * ph.cos_a * E + E * E;
    poisson = (2.0 * pi * pi / (period * period)) * (1.0 - E * E) / (b * G);
    flux = (pi / period) * ph.sin_a * 2.0 * E / G;
  }
}

inline KernelValues eval_all(const Phase& ph, double d, double period) {
  const double pi = std::numbers::pi;
  const double b = 2.0 * pi * std::abs(d) / period;
  KernelValues k;
  const double p2 = pi * pi / (period * period);
  if (b <= kLargeB) {
    const double sh = std::sinh(0.5 * b);
    const double D = sh * sh + ph.sin_half_sq;
    const double S = detail::sinhc(b);
    const double T = detail::sinhc_slope(b);
    k.poisson = p2 * S / D;
    k.flux = (pi / period) * ph.sin_a / (2.0 * D);
    k.poisson2 = 2.0 * p2 * p2 * (0.5 * S * S - T * D) / (D * D);
    k.flux2 = (pi * p2 / (2.0 * period)) * ph.sin_a * S / (D * D);
  } else {
    const double E = std::exp(-b);
    const double c = ph.cos_a;
    const double G = 1.0 - 2.0 * c * E + E * E;
    const double N = 1.0 - E * E;
    k.poisson = 2.0 * p2 * N / (b * G);
    k.flux = (pi / period) * ph.sin_a * 2.0 * E / G;
    const double dN = 2.0 * E * E;
    const double dG = 2.0 * c * E - 2.0 * E * E;
    const double dW = dN / (b * G) - N / (b * b * G) - N * dG / (b * G * G);
    k.poisson2 = -4.0 * p2 * p2 * dW / b;
    k.flux2 = 4.0 * (pi * p2 / period) * ph.sin_a * E * N / (b * G * G);
  }
  return k;
}

/// sum_j 1/((s + jP)^2 + d^2)
inline double poisson_periodized(double s, double d, double period) {
  const Phase ph = Phase::of(s, period);
  detail::check_singular(ph.at_origin ? 0.0 : 1.0, d);
  double p = 0.0, f = 0.0;
  eval_first(ph, d, period, p, f);
  return p;
}

/// Symmetrically paired sum_j (s + jP)/((s + jP)^2 + d^2); at d = 0 this is the
/// periodic principal-value kernel (pi/P) cot(pi s / P).
inline double flux_periodized(double s, double d, double period) {
  const Phase ph = Phase::of(s, period);
  detail::check_singular(ph.at_origin ? 0.0 : 1.0, d);
  double p = 0.0, f = 0.0;
  eval_first(ph, d, period, p, f);
  return f;
}

/// sum_j 1/((s + jP)^2 + d^2)^2
inline double poisson2_periodized(double s, double d, double period) {
  const Phase ph = Phase::of(s, period);
  detail::check_singular(ph.at_origin ? 0.0 : 1.0, d);
  return eval_all(ph, d, period).poisson2;
}

/// sum_j (s + jP)/((s + jP)^2 + d^2)^2
inline double flux2_periodized(double s, double d, double period) {
  const Phase ph = Phase::of(s, period);
  detail::check_singular(ph.at_origin ? 0.0 : 1.0, d);
  return eval_all(ph, d, period).flux2;
}

/// Z_p(s) = sum_j (s + jP)^{-p}, paired for p = 1.  Uses
/// d^n/dx^n cot(pi x) = T_n(cot(pi x)) with T_0(c) = c, T_{n+1} = -pi (1 + c^2) T_n'(c).
inline double power_sum_periodized(double s, int p, double period) {
  if (p < 1) throw InvalidArgument("power_sum_periodized: p must be >= 1");
  const double pi = std::numbers::pi;
  const double x = detail::reduce(s, period) / period;
  if (x == 0.0) throw InvalidArgument("power_sum_periodized: singular at s = 0 (mod P)");
  const double c = std::cos(pi * x) / std::sin(pi * x);
  std::vector<double> poly{0.0, 1.0};  // coefficients of T_0 in powers of c
  double fact = 1.0;
  for (int n = 0; n < p - 1; ++n) {
    // derivative, then multiply by -pi (1 + c^2)
    std::vector<double> dpoly(poly.size() > 1 ? poly.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) dpoly[i - 1] = static_cast<double>(i) * poly[i];
    std::vector<double> next(dpoly.size() + 2, 0.0);
    for (std::size_t i = 0; i < dpoly.size(); ++i) {
      next[i] += -pi * dpoly[i];
      next[i + 2] += -pi * dpoly[i];
    }
    poly = std::move(next);
    fact *= static_cast<double>(n + 1);
  }
  double val = 0.0;
  for (std::size_t i = poly.size(); i-- > 0;) val = val * c + poly[i];
  const double sign = (p - 1) % 2 == 0 ? 1.0 : -1.0;
  return sign * pi * val / (fact * std::pow(period, p));
}

/// Symmetric image summation of a rational kernel K with K(z) ~ lead * z^{-p} as
/// |z| -> infinity.  The truncated tail is replaced by the exact tail of lead*z^{-p}.
template <class Kernel>
double image_sum(Kernel&& kernel, double s, double period, int images, double lead, int p) {
  double sum = kernel(s);
  double pow_partial = std::pow(s, -p);
  for (int j = 1; j <= images; ++j) {
    const double zp = s + j * period;
    const double zm = s - j * period;
    sum += kernel(zp) + kernel(zm);
    pow_partial += std::pow(zp, -p) + std::pow(zm, -p);
  }
  if (lead != 0.0) sum += lead * (power_sum_periodized(s, p, period) - pow_partial);
  return sum;
}

}  // namespace muskat::kernels
