// The evolution right-hand side Phi = (Phi_1, Phi_2) for X = (f, h).
//
//   Phi_1 = T1 Bcal(f)[f'] + (T2/pi) ((c+f) f' C_1[h'] - f' C_1[h h'] + D_1[h'])
//   Phi_2 = T2 Bcal(h)[h'] + (T1/pi) ((h-c) h' C'_1[f'] - h' C'_1[f f'] + D'_1[f'])
//
// Every nonlocal term has a first-order kernel (m <= 1), so the whole
// evaluation is four O(N^2) sweeps: one self-interaction sweep per interface
// and one cross sweep per direction, each serving several densities at once.
#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"
#include "muskat/layers.hpp"
#include "muskat/nonlocal.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/state.hpp"

namespace muskat {

/// Every integral that enters Phi and the interface traces.
struct PhiParts {
  GridFunction fp, hp;                   // f', h'
  GridFunction Bf_flux, Bf_poisson;      // B^0_{0,1}(f)[f'], B^0_{1,1}(f)[f']
  GridFunction Bh_flux, Bh_poisson;      // same for h with h'
  GridFunction C_hp, C_hhp, D_hp;        // C_1(X)[h'], C_1(X)[h h'], D_1(X)[h']
  GridFunction Cp_fp, Cp_ffp, Dp_fp;     // C'_1(X)[f'], C'_1(X)[f f'], D'_1(X)[f']
};

namespace detail {

// For d(x, s) = here(x) - there(x - s), accumulate poisson- and flux-weighted
// sums of each density.  Returned as {Q[rho_0], F[rho_0], Q[rho_1], F[rho_1], ...}.
template <std::size_t K>
std::array<GridFunction, 2 * K> cross_sweep(const OffsetNodes& nodes, const GridFunction& here, const GridFunction& there,
                                            const std::array<const GridFunction*, K>& dens) {
  const Grid& g = here.grid();
  const std::size_t N = g.size();
  const double P = g.period();
  const GridFunction there_s = nodes.staggered(there);
  std::array<GridFunction, K> dens_s;
  for (std::size_t k = 0; k < K; ++k) dens_s[k] = nodes.staggered(*dens[k]);
  std::array<GridFunction, 2 * K> out;
  for (auto& o : out) o = GridFunction(g);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    std::array<double, 2 * K> acc{};
    const double hi = here[i];
    for (std::size_t qi = 0; qi < N; ++qi) {
      const std::size_t idx = nodes.stag_index(i, qi);
      double pk = 0.0, fk = 0.0;
      kernels::eval_first(nodes.phase(qi), hi - there_s[idx], P, pk, fk);
      for (std::size_t k = 0; k < K; ++k) {
        acc[2 * k] += pk * dens_s[k][idx];
        acc[2 * k + 1] += fk * dens_s[k][idx];
      }
    }
    for (std::size_t k = 0; k < 2 * K; ++k) out[k][i] = nodes.weight() * acc[k];
  }
  return out;
}

}  // namespace detail

inline PhiParts phi_parts(const InterfaceState& X, const QuadratureScheme& scheme = {}) {
  require_finite(X.f, "compute_phi f");
  require_finite(X.h, "compute_phi h");
  require_admissible(X, "compute_phi");
  const Grid& g = X.grid();
  const OffsetNodes nodes(g, scheme);
  const double c = X.c_inf();

  PhiParts r;
  r.fp = spectral_derivative(X.f);
  r.hp = spectral_derivative(X.h);
  {
    auto b = apply_B0_first(X.f, r.fp, scheme);
    r.Bf_flux = std::move(b.flux);
    r.Bf_poisson = std::move(b.poisson);
  }
  {
    auto b = apply_B0_first(X.h, r.hp, scheme);
    r.Bh_flux = std::move(b.flux);
    r.Bh_poisson = std::move(b.poisson);
  }
  {
    const GridFunction hhp = X.h * r.hp;
    auto s = detail::cross_sweep<2>(nodes, X.f + c, X.h, {&r.hp, &hhp});
    r.C_hp = std::move(s[0]);
    r.D_hp = std::move(s[1]);
    r.C_hhp = std::move(s[2]);
  }
  {
    const GridFunction ffp = X.f * r.fp;
    auto s = detail::cross_sweep<2>(nodes, X.h - c, X.f, {&r.fp, &ffp});
    r.Cp_fp = std::move(s[0]);
    r.Dp_fp = std::move(s[1]);
    r.Cp_ffp = std::move(s[2]);
  }
  return r;
}

struct Phi {
  GridFunction phi1;
  GridFunction phi2;
};

inline Phi assemble_phi(const InterfaceState& X, const PhiParts& r) {
  const double pi = std::numbers::pi;
  const double t1 = X.params.theta1(), t2 = X.params.theta2();
  const double c = X.c_inf();
  const GridFunction& f = X.f;
  const GridFunction& h = X.h;
  GridFunction self1 = r.Bf_flux + r.fp * r.Bf_poisson;
  GridFunction cross1 = (f + c) * r.fp * r.C_hp - r.fp * r.C_hhp + r.D_hp;
  GridFunction self2 = r.Bh_flux + r.hp * r.Bh_poisson;
  GridFunction cross2 = (h - c) * r.hp * r.Cp_fp - r.hp * r.Cp_ffp + r.Dp_fp;
  return Phi{(t1 / pi) * self1 + (t2 / pi) * cross1, (t2 / pi) * self2 + (t1 / pi) * cross2};
}

/// Phi(X); throws AdmissibilityError naming the violating node.
inline Phi compute_phi(const InterfaceState& X, const QuadratureScheme& scheme = {}) {
  return assemble_phi(X, phi_parts(X, scheme));
}

/// Phi assembled term by term from apply_Bcal / apply_layer (slow; for cross-checks).
inline Phi compute_phi_reference(const InterfaceState& X, const QuadratureScheme& scheme = {}) {
  require_admissible(X, "compute_phi_reference");
  const double pi = std::numbers::pi;
  const double t1 = X.params.theta1(), t2 = X.params.theta2();
  const double c = X.c_inf();
  const GridFunction fp = spectral_derivative(X.f);
  const GridFunction hp = spectral_derivative(X.h);
  auto L = [&](LayerKind k, const GridFunction& w) { return apply_layer(k, 1, X, w, scheme); };
  GridFunction p1 = t1 * apply_Bcal(X.f, fp, scheme) +
                    (t2 / pi) * ((X.f + c) * fp * L(LayerKind::C, hp) - fp * L(LayerKind::C, X.h * hp) + L(LayerKind::D, hp));
  GridFunction p2 = t2 * apply_Bcal(X.h, hp, scheme) +
                    (t1 / pi) * ((X.h - c) * hp * L(LayerKind::C_prime, fp) - hp * L(LayerKind::C_prime, X.f * fp) +
                                 L(LayerKind::D_prime, fp));
  return Phi{std::move(p1), std::move(p2)};
}

/// Phi_1 with theta2 == 0 (rho2 == rho3): the classical two-phase law T1 Bcal(f)[f'].
inline GridFunction two_phase_reduction(const InterfaceState& X, const QuadratureScheme& scheme = {}) {
  if (X.params.theta2() != 0.0) throw InvalidArgument("two_phase_reduction: requires rho2 == rho3 (theta2 == 0)");
  X.params.validate(true);
  require_admissible(X, "two_phase_reduction");
  return X.params.theta1() * apply_Bcal(X.f, spectral_derivative(X.f), scheme);
}

}  // namespace muskat
