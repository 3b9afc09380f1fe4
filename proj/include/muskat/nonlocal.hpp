// The singular family B_{n,m} and the truncated Hilbert transform.
//
// B_{n,m}(u_1..u_n | v_1..v_m)[w](x)
//   = PV int prod(du_i / s) / prod(1 + (dv_i / s)^2) * w(x - s) / s ds,
// with du = u(x) - u(x - s).  Over the common denominator the kernel is
//   prod(du_i) * s^{2m-n-1} / prod(s^2 + dv_i^2),
// which is periodized in s before the offset-node quadrature is applied.
#pragma once

#include <cmath>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <vector>

#include "muskat/diagnostics.hpp"
#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"
#include "muskat/quadrature.hpp"

namespace muskat {

namespace detail {

inline void check_grids(const std::vector<GridFunction>& fs, const GridFunction& ref, const char* what) {
  for (const auto& f : fs) {
    if (!(f.grid() == ref.grid())) throw GridMismatch(std::string(what) + ": arguments live on different grids");
  }
}

// Paired image sum of lead * z^{e} / prod(z^2 + d_k^2), with the z^{-p} tail
// (p = 2m - e) restored analytically.
inline double rational_image_sum(double s, double period, int images, int e, const double* d2, std::size_t m) {
  auto kern = [&](double z) {
    double den = 1.0;
    for (std::size_t k = 0; k < m; ++k) den *= z * z + d2[k];
    double num = 1.0;
    for (int j = 0; j < e; ++j) num *= z;
    for (int j = 0; j > e; --j) num /= z;
    return num / den;
  };
  const int p = 2 * static_cast<int>(m) - e;
  auto zpow = [p](double z) {
    double r = 1.0;
    for (int j = 0; j < p; ++j) r *= z;
    return 1.0 / r;
  };
  double sum = kern(s);
  double partial = zpow(s);
  for (int j = 1; j <= images; ++j) {
    const double zp = s + j * period, zm = s - j * period;
    sum += kern(zp) + kern(zm);
    partial += zpow(zp) + zpow(zm);
  }
  return sum + (kernels::power_sum_periodized(s, p, period) - partial);
}

inline void warn_generic_b_once() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    warn("apply_B with m >= 2 or n >= 2 uses truncated image summation; accuracy is test-grade");
  });
}

}  // namespace detail

/// B_{n,m}(numerators | denominators)[density].
inline GridFunction apply_B(const std::vector<GridFunction>& numerators,
                            const std::vector<GridFunction>& denominators, const GridFunction& density,
                            const QuadratureScheme& scheme = {}) {
  detail::check_grids(numerators, density, "apply_B");
  detail::check_grids(denominators, density, "apply_B");
  require_finite(density, "apply_B density");

  const Grid& g = density.grid();
  const OffsetNodes nodes(g, scheme);
  const std::size_t N = g.size();
  const std::size_t n = numerators.size(), m = denominators.size();
  const double P = g.period();

  std::vector<GridFunction> num_stag, den_stag;
  for (const auto& u : numerators) num_stag.push_back(nodes.staggered(u));
  for (const auto& v : denominators) den_stag.push_back(nodes.staggered(v));
  const GridFunction w_stag = nodes.staggered(density);

  const bool closed = (m == 0) || (m == 1 && n <= 1);
  if (!closed) detail::warn_generic_b_once();

  // s-only kernel for m = 0: Z_{n+1}(s)
  std::vector<double> zsum;
  if (m == 0) {
    zsum.resize(N);
    for (std::size_t qi = 0; qi < N; ++qi) zsum[qi] = kernels::power_sum_periodized(nodes.s(qi), static_cast<int>(n) + 1, P);
  }

  GridFunction out(g);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> d2(m);
    double acc = 0.0;
    for (std::size_t qi = 0; qi < N; ++qi) {
      const std::size_t idx = nodes.stag_index(i, qi);
      const double w = w_stag[idx];
      if (w == 0.0) continue;
      double lead = 1.0;
      for (std::size_t k = 0; k < n; ++k) lead *= numerators[k][i] - num_stag[k][idx];
      if (lead == 0.0) continue;
      double K;
      if (m == 0) {
        K = zsum[qi];
      } else if (closed) {
        const double d = denominators[0][i] - den_stag[0][idx];
        double pk = 0.0, fk = 0.0;
        kernels::eval_first(nodes.phase(qi), d, P, pk, fk);
        K = n == 0 ? fk : pk;
      } else {
        for (std::size_t k = 0; k < m; ++k) {
          const double d = denominators[k][i] - den_stag[k][idx];
          d2[k] = d * d;
        }
        K = detail::rational_image_sum(nodes.s(qi), P, scheme.image_pairs, 2 * static_cast<int>(m) - static_cast<int>(n) - 1,
                                       d2.data(), m);
      }
      acc += lead * K * w;
    }
    out[i] = nodes.weight() * acc;
  }
  return out;
}

/// B^0_{n,m}(u)[density]: every numerator and denominator equal to u.
inline GridFunction apply_B0(const GridFunction& u, int n, int m, const GridFunction& density,
                             const QuadratureScheme& scheme = {}) {
  if (n < 0 || m < 0) throw InvalidArgument("apply_B0: n and m must be non-negative");
  return apply_B(std::vector<GridFunction>(static_cast<std::size_t>(n), u),
                 std::vector<GridFunction>(static_cast<std::size_t>(m), u), density, scheme);
}

/// Both B^0_{0,1}(u)[w] and B^0_{1,1}(u)[w] from one sweep.
struct B0Pair {
  GridFunction flux;     // B^0_{0,1}(u)[w]
  GridFunction poisson;  // B^0_{1,1}(u)[w]
};

inline B0Pair apply_B0_first(const GridFunction& u, const GridFunction& density, const QuadratureScheme& scheme = {}) {
  density.check_same(u);
  require_finite(u, "apply_B0_first");
  require_finite(density, "apply_B0_first density");
  const Grid& g = u.grid();
  const OffsetNodes nodes(g, scheme);
  const std::size_t N = g.size();
  const double P = g.period();
  const GridFunction us = nodes.staggered(u);
  const GridFunction ws = nodes.staggered(density);
  B0Pair out{GridFunction(g), GridFunction(g)};
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    double af = 0.0, ap = 0.0;
    for (std::size_t qi = 0; qi < N; ++qi) {
      const std::size_t idx = nodes.stag_index(i, qi);
      const double d = u[i] - us[idx];
      double pk = 0.0, fk = 0.0;
      kernels::eval_first(nodes.phase(qi), d, P, pk, fk);
      af += fk * ws[idx];
      ap += d * pk * ws[idx];
    }
    out.flux[i] = nodes.weight() * af;
    out.poisson[i] = nodes.weight() * ap;
  }
  return out;
}

/// The two-phase operator (1/pi)(B^0_{0,1}(u) + u' B^0_{1,1}(u)).
inline GridFunction apply_Bcal(const GridFunction& u, const GridFunction& density, const QuadratureScheme& scheme = {}) {
  auto b = apply_B0_first(u, density, scheme);
  GridFunction out = spectral_derivative(u) * b.poisson + b.flux;
  out *= 1.0 / std::numbers::pi;
  return out;
}

/// (1/pi) int_{|s| >= delta} w(x - s) cot-kernel ds on the offset nodes.  With
/// delta <= spacing * offset this is the full principal value.
inline GridFunction truncated_hilbert(double delta, const GridFunction& density, const QuadratureScheme& scheme = {}) {
  if (!(delta > 0.0)) throw InvalidArgument("truncated_hilbert: delta must be positive");
  require_finite(density, "truncated_hilbert");
  const Grid& g = density.grid();
  if (delta >= 0.5 * g.period()) {
    warn("truncated_hilbert: delta >= P/2 leaves nothing to integrate; returning 0");
    return GridFunction(g);
  }
  const OffsetNodes nodes(g, scheme);
  const std::size_t N = g.size();
  const double P = g.period();
  const double cut = delta - 1e-12 * g.spacing();
  std::vector<double> kern(N, 0.0);
  for (std::size_t qi = 0; qi < N; ++qi) {
    if (std::abs(nodes.s(qi)) < cut) continue;
    const auto& ph = nodes.phase(qi);
    kern[qi] = (1.0 / P) * ph.sin_a / (2.0 * ph.sin_half_sq);  // (1/pi) * (pi/P) cot(pi s / P)
  }
  const GridFunction ws = nodes.staggered(density);
  GridFunction out(g);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (std::size_t qi = 0; qi < N; ++qi) acc += kern[qi] * ws[nodes.stag_index(i, qi)];
    out[i] = nodes.weight() * acc;
  }
  return out;
}

}  // namespace muskat
