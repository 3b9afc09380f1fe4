// Non-singular layer families C_m, C'_m, D_m, D'_m and their E_{n,m,p} extension.
//
//   E^n_{m,p}(X_1..X_{m+p})[Y_1..Y_n][w](x)
//     = int s^j w(x - s) prod_{i>m} dX_i prod dY_i / prod_{i<=m} (s^2 + dX_i^2) ds
// with j = 0 for C, 1 for D.  Unprimed: dX = c + f(x) - h(x - s),
// dY = u(x) - v(x - s).  Primed: dX = h(x) - c - f(x - s), dY = v(x) - u(x - s).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"
#include "muskat/nonlocal.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/state.hpp"

namespace muskat {

enum class LayerKind { C, C_prime, D, D_prime };

inline bool is_primed(LayerKind k) noexcept { return k == LayerKind::C_prime || k == LayerKind::D_prime; }
inline int s_power(LayerKind k) noexcept { return (k == LayerKind::D || k == LayerKind::D_prime) ? 1 : 0; }

inline const char* to_string(LayerKind k) noexcept {
  switch (k) {
    case LayerKind::C: return "C";
    case LayerKind::C_prime: return "C'";
    case LayerKind::D: return "D";
    case LayerKind::D_prime: return "D'";
  }
  return "?";
}

/// Y = (u, v): a direction for (f, h).
struct Direction {
  GridFunction u;
  GridFunction v;
};

struct LayerRequest {
  LayerKind kind = LayerKind::C;
  int n = 0;
  int m = 1;
  int p = 0;
  std::vector<InterfaceState> states;  // m + p
  std::vector<Direction> directions;   // n
  GridFunction density;
};

/// Relative |d1^2 - d2^2| below which an m = 2 pair counts as coincident.
inline constexpr double kCoincidentTol = 1e-8;
/// Up to this relative separation partial fractions lose too many digits; the
/// pair is summed over images instead.
inline constexpr double kPartialFractionTol = 1e-4;
/// Image pairs for kernels decaying like |z|^{-3} or faster (tail restored analytically).
inline constexpr int kFastImagePairs = 64;

namespace detail {

inline void validate_layer(const LayerRequest& r) {
  if (r.m < 1 || r.n < 0 || r.p < 0) throw InvalidArgument("apply_layer: need m >= 1, n >= 0, p >= 0");
  if (r.states.size() != static_cast<std::size_t>(r.m + r.p)) {
    throw InvalidArgument("apply_layer: expected m + p states");
  }
  if (r.directions.size() != static_cast<std::size_t>(r.n)) throw InvalidArgument("apply_layer: expected n directions");
  const double c = r.states.front().c_inf();
  for (const auto& X : r.states) {
    X.f.check_same(r.density);
    X.h.check_same(r.density);
    if (X.c_inf() != c) throw InvalidArgument("apply_layer: states disagree on c_inf");
    require_admissible(X, "apply_layer");
  }
  for (const auto& Y : r.directions) {
    Y.u.check_same(r.density);
    Y.v.check_same(r.density);
  }
  require_finite(r.density, "apply_layer density");
}

// Periodized s^j / ((s^2 + d1^2)(s^2 + d2^2)).
inline double pair_kernel(const kernels::Phase& ph, double s, double d1, double d2, int j, double P) {
  const double a = d1 * d1, b = d2 * d2;
  const double scale = std::max(a, b);
  const double sep = std::abs(a - b);
  if (sep <= kCoincidentTol * scale) {
    const auto k = kernels::eval_all(ph, std::sqrt(0.5 * (a + b)), P);
    return j == 0 ? k.poisson2 : k.flux2;
  }
  if (sep <= kPartialFractionTol * scale) {
    const double d2s[2] = {a, b};
    return rational_image_sum(s, P, kFastImagePairs, j, d2s, 2);
  }
  double p1 = 0, f1 = 0, p2 = 0, f2 = 0;
  kernels::eval_first(ph, d1, P, p1, f1);
  kernels::eval_first(ph, d2, P, p2, f2);
  return j == 0 ? (p1 - p2) / (b - a) : (f1 - f2) / (b - a);
}

}  // namespace detail

inline GridFunction apply_layer(const LayerRequest& r, const QuadratureScheme& scheme = {}) {
  detail::validate_layer(r);
  const Grid& g = r.density.grid();
  const OffsetNodes nodes(g, scheme);
  const std::size_t N = g.size();
  const double P = g.period();
  const double c = r.states.front().c_inf();
  const bool primed = is_primed(r.kind);
  const int j = s_power(r.kind);
  const std::size_t ns = r.states.size(), m = static_cast<std::size_t>(r.m);

  // at x: c + f (unprimed) or h - c (primed); at x - s: h or f
  std::vector<GridFunction> here, there;
  for (const auto& X : r.states) {
    if (!primed) {
      here.push_back(X.f + c);
      there.push_back(nodes.staggered(X.h));
    } else {
      here.push_back(X.h - c);
      there.push_back(nodes.staggered(X.f));
    }
  }
  std::vector<const GridFunction*> dir_here;
  std::vector<GridFunction> dir_there;
  for (const auto& Y : r.directions) {
    dir_here.push_back(primed ? &Y.v : &Y.u);
    dir_there.push_back(nodes.staggered(primed ? Y.u : Y.v));
  }
  const GridFunction ws = nodes.staggered(r.density);

  GridFunction out(g);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> d(ns), d2(m);
    double acc = 0.0;
    for (std::size_t qi = 0; qi < N; ++qi) {
      const std::size_t idx = nodes.stag_index(i, qi);
      const double w = ws[idx];
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < ns; ++k) d[k] = here[k][i] - there[k][idx];
      double num = w;
      for (std::size_t k = m; k < ns; ++k) num *= d[k];
      for (std::size_t k = 0; k < dir_there.size(); ++k) num *= (*dir_here[k])[i] - dir_there[k][idx];
      if (num == 0.0) continue;
      const auto& ph = nodes.phase(qi);
      double K;
      if (m == 1) {
        double pk = 0, fk = 0;
        kernels::eval_first(ph, d[0], P, pk, fk);
        K = j == 0 ? pk : fk;
      } else if (m == 2) {
        K = detail::pair_kernel(ph, nodes.s(qi), d[0], d[1], j, P);
      } else {
        for (std::size_t k = 0; k < m; ++k) d2[k] = d[k] * d[k];
        K = detail::rational_image_sum(nodes.s(qi), P, kFastImagePairs, j, d2.data(), m);
      }
      acc += num * K;
    }
    out[i] = nodes.weight() * acc;
  }
  return out;
}

/// Shorthand for E^n_{m,p} with every state equal to X.
inline GridFunction apply_layer(LayerKind kind, int m, int p, const InterfaceState& X, const std::vector<Direction>& dirs,
                                const GridFunction& density, const QuadratureScheme& scheme = {}) {
  LayerRequest r{kind, static_cast<int>(dirs.size()), m, p,
                 std::vector<InterfaceState>(static_cast<std::size_t>(m + p), X), dirs, density};
  return apply_layer(r, scheme);
}

/// C_m / D_m (and primed) of a single state.
inline GridFunction apply_layer(LayerKind kind, int m, const InterfaceState& X, const GridFunction& density,
                                const QuadratureScheme& scheme = {}) {
  return apply_layer(kind, m, 0, X, {}, density, scheme);
}

/// d/dX E^n_{m,p}(X)[Y_1..Y_n][w] in direction Y:
///   p E^{n+1}_{m,p-1}(X)[.., Y] - 2m E^{n+1}_{m+1,p+1}(X)[.., Y].
inline GridFunction frechet_layer(LayerKind kind, int m, int p, const InterfaceState& X, const std::vector<Direction>& dirs,
                                  const Direction& Y, const GridFunction& density, const QuadratureScheme& scheme = {}) {
  if (m < 1 || p < 0) throw InvalidArgument("frechet_layer: need m >= 1, p >= 0");
  require_admissible(X, "frechet_layer");
  std::vector<Direction> ext = dirs;
  ext.push_back(Y);
  GridFunction out = apply_layer(kind, m + 1, p + 1, X, ext, density, scheme);
  out *= -2.0 * m;
  if (p > 0) out += static_cast<double>(p) * apply_layer(kind, m, p - 1, X, ext, density, scheme);
  return out;
}

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;  // max |lhs|, for context
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double tolerance = 1e-7;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
  }
  double max_residual() const {
    double r = 0.0;
    for (const auto& c : checks) r = std::max(r, c.residual);
    return r;
  }
};

/// Evaluates both sides of the difference identities between X and Xt, the
/// derivative expansion of E_1(X)[w] and the integration-by-parts rewrites of
/// C_1[w'] and D_1[w'].
inline IdentityReport identity_report(const InterfaceState& X, const InterfaceState& Xt, const GridFunction& w,
                                      double tolerance = 1e-7, const QuadratureScheme& scheme = {}) {
  require_admissible(X, "identity_report");
  require_admissible(Xt, "identity_report");
  IdentityReport rep;
  rep.tolerance = tolerance;
  auto record = [&](std::string name, const GridFunction& lhs, const GridFunction& rhs) {
    const double r = max_abs(lhs - rhs);
    rep.checks.push_back({std::move(name), r, max_abs(lhs), std::isfinite(r) && r <= tolerance});
  };
  const double c = X.c_inf();
  const auto& f = X.f;
  const auto& h = X.h;
  const auto& ft = Xt.f;
  const auto& ht = Xt.h;

  // Two-state E_2 with states (Xt, X).
  auto E2 = [&](LayerKind k, const GridFunction& dens) {
    LayerRequest r{k, 0, 2, 0, {Xt, X}, {}, dens};
    return apply_layer(r, scheme);
  };

  const GridFunction sum_up = ft + f + 2.0 * c;  // 2c + f~ + f
  const GridFunction dif_up = ft - f;
  for (LayerKind k : {LayerKind::C, LayerKind::D}) {
    const GridFunction lhs = apply_layer(k, 1, X, w, scheme) - apply_layer(k, 1, Xt, w, scheme);
    GridFunction rhs = sum_up * dif_up * E2(k, w);
    rhs -= dif_up * E2(k, (ht + h) * w);
    rhs -= sum_up * E2(k, (ht - h) * w);
    rhs += E2(k, (ht * ht - h * h) * w);
    record(std::string("difference ") + to_string(k) + "_1", lhs, rhs);
  }
  for (LayerKind k : {LayerKind::C_prime, LayerKind::D_prime}) {
    const GridFunction lhs = apply_layer(k, 1, X, w, scheme) - apply_layer(k, 1, Xt, w, scheme);
    GridFunction rhs = (ht * ht - h * h) * E2(k, w);
    rhs -= (ht - h) * E2(k, sum_up * w);
    rhs -= (ht + h) * E2(k, dif_up * w);
    rhs += E2(k, sum_up * dif_up * w);
    record(std::string("difference ") + to_string(k) + "_1", lhs, rhs);
  }

  const GridFunction fp = spectral_derivative(f);
  const GridFunction hp = spectral_derivative(h);
  const GridFunction wp = spectral_derivative(w);
  const GridFunction cf = f + c;
  auto E1 = [&](LayerKind k, const GridFunction& dens) { return apply_layer(k, 1, X, dens, scheme); };
  auto E2x = [&](LayerKind k, const GridFunction& dens) { return apply_layer(k, 2, X, dens, scheme); };

  for (LayerKind k : {LayerKind::C, LayerKind::D}) {
    const GridFunction lhs = spectral_derivative(E1(k, w));
    GridFunction inner = cf * fp * E2x(k, w);
    inner -= fp * E2x(k, h * w);
    inner -= cf * E2x(k, hp * w);
    inner += E2x(k, h * hp * w);
    record(std::string("derivative ") + to_string(k) + "_1", lhs, E1(k, wp) - 2.0 * inner);
  }

  {
    GridFunction rhs = E2x(LayerKind::D, w) + cf * E2x(LayerKind::C, hp * w) - E2x(LayerKind::C, h * hp * w);
    rhs *= -2.0;
    record("by parts C_1[w']", E1(LayerKind::C, wp), rhs);
  }
  {
    GridFunction inner = cf * E2x(LayerKind::D, hp * w) - E2x(LayerKind::D, h * hp * w) - cf * cf * E2x(LayerKind::C, w) -
                         E2x(LayerKind::C, h * h * w) + 2.0 * cf * E2x(LayerKind::C, h * w);
    record("by parts D_1[w']", E1(LayerKind::D, wp), -1.0 * E1(LayerKind::C, w) - 2.0 * inner);
  }
  return rep;
}

}  // namespace muskat
