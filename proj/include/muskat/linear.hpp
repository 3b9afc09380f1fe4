// Linearization of Phi: finite-difference directional derivatives, the
// analytic derivative of Phi_1 in h, the flat-state symbol and dispersion scans.
//
// At the flat state a mode (a, b) cos(kx) evolves under
//   M(k) = |k| [[T1, T2 e], [T1 e, T2]],  e = exp(-c |k|).
// The diagonal is the two-phase multiplier; the off-diagonal entries come from
// the flat D-kernel pair D_1[sin k.] = -pi e^{-ck} cos k., the only cross term
// that survives linearization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/layers.hpp"
#include "muskat/rhs.hpp"
#include "muskat/state.hpp"

namespace muskat {

/// (Phi(X + eps Y) - Phi(X - eps Y)) / (2 eps).
inline Phi directional_derivative_fd(const InterfaceState& X, const Direction& Y, double eps,
                                     const QuadratureScheme& scheme = {}) {
  if (!(eps > 0.0)) throw InvalidArgument("directional_derivative_fd: eps must be positive");
  const auto a = compute_phi(perturbed(X, Y.u, Y.v, eps), scheme);
  const auto b = compute_phi(perturbed(X, Y.u, Y.v, -eps), scheme);
  const double s = 0.5 / eps;
  return Phi{s * (a.phi1 - b.phi1), s * (a.phi2 - b.phi2)};
}

/// d/dh Phi_1(X)[v], assembled from layer potentials:
///   (T2/pi) [ (c+f) f' (C_1[v'] + 2 C_{2,1}[v h'])
///             - f' (C_1[h v' + v h'] + 2 C_{2,1}[v h h'])
///             + D_1[v'] + 2 D_{2,1}[v h'] ]
inline GridFunction offdiag_derivative(const InterfaceState& X, const GridFunction& v, const QuadratureScheme& scheme = {}) {
  require_admissible(X, "offdiag_derivative");
  X.f.check_same(v);
  const double t2 = X.params.theta2();
  if (t2 == 0.0 || max_abs(v) == 0.0) return GridFunction(X.grid());
  const double c = X.c_inf();
  const GridFunction fp = spectral_derivative(X.f);
  const GridFunction hp = spectral_derivative(X.h);
  const GridFunction vp = spectral_derivative(v);
  auto L1 = [&](LayerKind k, const GridFunction& w) { return apply_layer(k, 1, X, w, scheme); };
  auto L21 = [&](LayerKind k, const GridFunction& w) { return apply_layer(k, 2, 1, X, {}, w, scheme); };
  const GridFunction vhp = v * hp;
  const GridFunction cw = L1(LayerKind::C, vp) + 2.0 * L21(LayerKind::C, vhp);
  const GridFunction chw = L1(LayerKind::C, X.h * vp + vhp) + 2.0 * L21(LayerKind::C, vhp * X.h);
  const GridFunction dw = L1(LayerKind::D, vp) + 2.0 * L21(LayerKind::D, vhp);
  return (t2 / std::numbers::pi) * ((X.f + c) * fp * cw - fp * chw + dw);
}

/// M(k) for the flat state; k is a wavenumber (the mode index on P = 2 pi).
inline Eigen::Matrix2d flat_symbol_matrix(const PhysicalParams& p, double k) {
  const double ak = std::abs(k);
  const double e = std::exp(-p.c_inf * ak);
  const double t1 = p.theta1(), t2 = p.theta2();
  Eigen::Matrix2d M;
  M << t1, t2 * e, t1 * e, t2;
  return ak * M;
}

/// Real eigenpairs of M(k), eigenvalues ascending.  Stable parameters always
/// give real eigenvalues: the discriminant is (T1 - T2)^2 + 4 T1 T2 e^2 > 0.
struct SymbolModes {
  double k = 0.0;
  Eigen::Matrix2d M;
  Eigen::Vector2d lambda;    // lambda(0) <= lambda(1)
  Eigen::Matrix2d vectors;   // columns, unit max-norm
};

inline SymbolModes symbol_modes(const PhysicalParams& p, double k) {
  SymbolModes s;
  s.k = k;
  s.M = flat_symbol_matrix(p, k);
  if (k == 0.0) {
    s.lambda.setZero();
    s.vectors.setIdentity();
    return s;
  }
  Eigen::EigenSolver<Eigen::Matrix2d> es(s.M);
  if (es.info() != Eigen::Success || es.eigenvalues().imag().cwiseAbs().maxCoeff() > 0.0) {
    throw NumericalFailure("symbol_modes: complex eigenvalues (unstable or degenerate parameters)");
  }
  Eigen::Vector2d lam = es.eigenvalues().real();
  Eigen::Matrix2d vec = es.eigenvectors().real();
  if (lam(0) > lam(1)) {
    std::swap(lam(0), lam(1));
    vec.col(0).swap(vec.col(1));
  }
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d col = vec.col(j);
    const int big = std::abs(col(0)) >= std::abs(col(1)) ? 0 : 1;
    vec.col(j) = col / col(big);
  }
  s.lambda = lam;
  s.vectors = vec;
  return s;
}

struct DispersionRow {
  int k = 0;
  double predicted_minus = 0.0;  // more negative eigenvalue
  double predicted_plus = 0.0;
  double measured_minus = 0.0;
  double measured_plus = 0.0;

  double rel_error() const noexcept {
    auto rel = [](double m, double p) { return p == 0.0 ? std::abs(m) : std::abs(m - p) / std::abs(p); };
    return std::max(rel(measured_minus, predicted_minus), rel(measured_plus, predicted_plus));
  }
};

struct DispersionSpec {
  std::size_t n_points = 512;
  double period = 2.0 * std::numbers::pi;
};

/// Instantaneous rate <Phi(X), E> / <X - flat, E> along each eigen-direction
/// E = e cos(kx), with X = flat + eps E.
inline std::vector<DispersionRow> dispersion_scan(const PhysicalParams& p, const std::vector<int>& modes, double eps,
                                                  const DispersionSpec& spec = {}) {
  p.validate();
  if (!(eps > 0.0)) throw InvalidArgument("dispersion_scan: eps must be positive");
  const Grid g(spec.n_points, spec.period);
  const double w = 2.0 * std::numbers::pi / spec.period;
  const auto flat = InterfaceState::flat(g, p);
  std::vector<DispersionRow> rows;
  for (int k : modes) {
    if (2 * static_cast<std::size_t>(std::abs(k)) >= g.size()) {
      throw InvalidArgument("dispersion_scan: mode " + std::to_string(k) + " not resolved on the grid");
    }
    // mode k on a period P has wavenumber 2 pi k / P
    const double kw = w * std::abs(k);
    const auto sm = symbol_modes(p, kw);
    const auto cosk = GridFunction::sample(g, [&](double x) { return std::cos(kw * x); });
    double measured[2];
    double predicted[2];
    for (int j = 0; j < 2; ++j) {
      const double a = sm.vectors(0, j), b = sm.vectors(1, j);
      const GridFunction E1 = a * cosk, E2 = b * cosk;
      const auto phi = compute_phi(perturbed(flat, E1, E2, eps));
      const double num = inner(phi.phi1, E1) + inner(phi.phi2, E2);
      const double den = eps * (inner(E1, E1) + inner(E2, E2));
      measured[j] = num / den;
      predicted[j] = sm.lambda(j);
    }
    rows.push_back({k, predicted[0], predicted[1], measured[0], measured[1]});
  }
  return rows;
}

/// Errors of a central difference against an exact derivative over several eps.
struct FdConvergence {
  std::vector<double> eps;
  std::vector<double> rel_error;
  double order = 0.0;  // least-squares slope of log error vs log eps
};

inline FdConvergence fd_convergence(const std::function<GridFunction(double)>& central, const GridFunction& exact,
                                    const std::vector<double>& eps) {
  FdConvergence r;
  const double scale = std::max(max_abs(exact), 1e-300);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps) {
    const double err = max_abs(central(e) - exact) / scale;
    r.eps.push_back(e);
    r.rel_error.push_back(err);
    const double lx = std::log(e), ly = std::log(std::max(err, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(eps.size());
  if (eps.size() >= 2) r.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

struct JacobianCheck {
  std::string name;
  double rel_error = 0.0;  // at the smallest eps
  double order = 0.0;
  bool passed = false;
};

struct JacobianSpec {
  std::vector<double> order_eps{1e-2, 1e-3, 1e-4};  // fit range, above the round-off floor
  double check_eps = 1e-5;
  double tolerance = 1e-6;
  double order_target = 2.0;
  double order_slack = 0.1;
};

/// Analytic derivatives against central differences at X in direction (u, v):
/// offdiag_derivative and frechet_layer for each layer family (n = 0, m = 1, p = 0).
inline std::vector<JacobianCheck> jacobian_checks(const InterfaceState& X, const Direction& Y, const JacobianSpec& spec = {}) {
  require_admissible(X, "jacobian_checks");
  std::vector<JacobianCheck> out;
  auto finish = [&](std::string name, const std::function<GridFunction(double)>& central, const GridFunction& exact) {
    const auto conv = fd_convergence(central, exact, spec.order_eps);
    const double err = max_abs(central(spec.check_eps) - exact) / std::max(max_abs(exact), 1e-300);
    JacobianCheck c{std::move(name), err, conv.order, false};
    c.passed = err <= spec.tolerance && std::abs(c.order - spec.order_target) <= spec.order_slack;
    out.push_back(std::move(c));
  };
  const GridFunction zero(X.grid());
  finish(
      "offdiag_derivative",
      [&](double e) { return directional_derivative_fd(X, Direction{zero, Y.v}, e).phi1; },
      offdiag_derivative(X, Y.v));
  const GridFunction w = spectral_derivative(X.h) + 1.0;
  for (auto kind : {LayerKind::C, LayerKind::D, LayerKind::C_prime, LayerKind::D_prime}) {
    finish(
        std::string("frechet ") + to_string(kind) + "_1",
        [&](double e) {
          const auto a = apply_layer(kind, 1, perturbed(X, Y.u, Y.v, e), w);
          const auto b = apply_layer(kind, 1, perturbed(X, Y.u, Y.v, -e), w);
          return (0.5 / e) * (a - b);
        },
        frechet_layer(kind, 1, 0, X, {}, Y, w));
  }
  return out;
}

}  // namespace muskat
