// Bulk velocity, interface traces, pressure and the field probes.
//
// Off the interfaces the velocity is
//   v(z) = (T1/pi) int (c + f(s) - y, x - s) / |z - (s, c + f(s))|^2 f'(s) ds
//        + (T2/pi) int (h(s) - y, x - s) / |z - (s, h(s))|^2 h'(s) ds,
// evaluated with the periodized kernels (t = x - s, d = y - sheet(s)) by the
// trapezoid rule on the sheet nodes.  The integrand is analytic in s within a
// strip whose width is the distance to the sheet, so near a sheet both the
// sheet and its slope are spectrally upsampled until the fine spacing is small
// against that distance.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"
#include "muskat/rhs.hpp"
#include "muskat/state.hpp"

namespace muskat {

enum class Region { above_f, between, below_h, on_interface };
enum class Interface { upper, lower };
enum class Side { above, below };

inline const char* to_string(Region r) noexcept {
  switch (r) {
    case Region::above_f: return "above_f";
    case Region::between: return "between";
    case Region::below_h: return "below_h";
    case Region::on_interface: return "on_interface";
  }
  return "?";
}

struct FieldPoint {
  double x = 0.0;
  double y = 0.0;
};

struct VelocitySample {
  double v1 = 0.0;
  double v2 = 0.0;
  std::optional<double> p;

  double norm() const noexcept { return std::hypot(v1, v2); }
};

/// Fine spacing must be at most dist / kResolveRatio for spectral accuracy.
inline constexpr double kResolveRatio = 5.0;
inline constexpr std::size_t kMaxRefinement = 1024;
/// Points closer than this fraction of the spacing are rejected by velocity_at.
inline constexpr double kExclusionFraction = 0.1;

/// Per-state evaluator; caches upsampled sheets and pressure constants.  Safe to
/// share between threads.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(InterfaceState X)
      : X_(std::move(X)), fi_(X_.f), hi_(X_.h), lip_f_(max_abs(spectral_derivative(X_.f))),
        lip_h_(max_abs(spectral_derivative(X_.h))), cache_(std::make_unique<Cache>()) {
    require_finite(X_.f, "field f");
    require_finite(X_.h, "field h");
  }

  const InterfaceState& state() const noexcept { return X_; }

  double upper(double x) const { return X_.c_inf() + fi_(x); }
  double lower(double x) const { return hi_(x); }

  /// Region of (x, y); on_interface if within tol (vertical) of either sheet.
  Region region(double x, double y, double tol = 0.0) const {
    const double yu = upper(x), yl = lower(x);
    if (std::abs(y - yu) <= tol || std::abs(y - yl) <= tol) return Region::on_interface;
    if (y > yu) return Region::above_f;
    if (y > yl) return Region::between;
    return Region::below_h;
  }

  /// Velocity without the exclusion-zone check.  refinement = 0 picks the
  /// upsampling factor per sheet from the distance; otherwise it is used as is.
  VelocitySample velocity_unchecked(double x, double y, std::size_t refinement = 0) const {
    const double pi = std::numbers::pi;
    const auto a = sheet_integral(Interface::upper, x, y, refinement);
    const auto b = sheet_integral(Interface::lower, x, y, refinement);
    const double t1 = X_.params.theta1() / pi, t2 = X_.params.theta2() / pi;
    return VelocitySample{t1 * a[0] + t2 * b[0], t1 * a[1] + t2 * b[1], std::nullopt};
  }

  /// Velocity at an off-interface point; throws TooCloseError inside the exclusion zone.
  VelocitySample velocity(double x, double y, std::size_t refinement = 0) const {
    const double tol = kExclusionFraction * X_.grid().spacing();
    if (region(x, y, tol) == Region::on_interface) {
      throw TooCloseError("velocity_at: point within 0.1 spacing of an interface; use velocity_trace");
    }
    return velocity_unchecked(x, y, refinement);
  }

  /// Upsampling factor that resolves the sheet at vertical distance |y - sheet(x)|.
  std::size_t refinement_for(Interface which, double x, double y) const {
    const double vert = std::abs(y - (which == Interface::upper ? upper(x) : lower(x)));
    const double lip = which == Interface::upper ? lip_f_ : lip_h_;
    const double dist = vert / std::sqrt(1.0 + lip * lip);
    const double h = X_.grid().spacing();
    std::size_t R = 1;
    while (R < kMaxRefinement && dist * static_cast<double>(R) < kResolveRatio * h) R *= 2;
    return R;
  }

  /// int_path v . dl along the straight segment from a to b.
  double segment_work(FieldPoint a, FieldPoint b) const {
    const double dx = b.x - a.x, dy = b.y - a.y;
    if (dx == 0.0 && dy == 0.0) return 0.0;
    auto integrand = [&](double t) {
      const auto v = velocity_unchecked(a.x + t * dx, a.y + t * dy);
      return v.v1 * dx + v.v2 * dy;
    };
    return integrate(integrand, 0.0, 1.0);
  }

  /// int v . dl along a polyline.
  double polyline_work(const std::vector<FieldPoint>& pts) const {
    double w = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) w += segment_work(pts[i], pts[i + 1]);
    return w;
  }

  /// Pressure, continuous across both interfaces at x = 0 (middle phase constant 0).
  double pressure(double x, double y) const {
    const Region r = region(x, y, kExclusionFraction * X_.grid().spacing());
    if (r == Region::on_interface) throw TooCloseError("pressure_at: point on an interface");
    const auto c = constants();
    const int i = r == Region::above_f ? 0 : r == Region::between ? 1 : 2;
    return raw_pressure(i, x, y) + c[i];
  }

  /// One-sided pressure limit on an interface at x (phase above or below it).
  double pressure_on(Interface which, Side side, double x) const {
    const int i = which == Interface::upper ? (side == Side::above ? 0 : 1) : (side == Side::above ? 1 : 2);
    const double y = which == Interface::upper ? upper(x) : lower(x);
    return raw_pressure(i, x, y) + constants()[i];
  }

  /// Reference curve of phase i (0, 1, 2) at x and its slope.
  std::pair<double, double> reference(int i, double x) const {
    const double c = X_.c_inf();
    if (i == 0) return {max_abs(X_.f) + c + 1.0, 0.0};
    if (i == 2) return {-max_abs(X_.h) - 1.0, 0.0};
    return {0.5 * (c + fi_(x) + hi_(x)), 0.5 * (fi_.derivative(x) + hi_.derivative(x))};
  }

  /// Work along the reference curve from 0 to x, then vertically to y.
  double path_work(int i, double x, double y) const {
    double w = 0.0;
    if (x != 0.0) {
      if (i == 1) {
        auto integrand = [&](double tau) {
          const auto [yr, slope] = reference(1, tau);
          const auto v = velocity_unchecked(tau, yr);
          return v.v1 + v.v2 * slope;
        };
        w += integrate(integrand, 0.0, x);
      } else {
        const double yr = reference(i, 0.0).first;
        w += segment_work({0.0, yr}, {x, yr});
      }
    }
    w += segment_work({x, reference(i, x).first}, {x, y});
    return w;
  }

 private:
  struct Sheet {
    std::vector<double> x, y, slope;
    double weight = 0.0;
  };
  struct Cache {
    std::mutex m;
    std::map<std::pair<int, std::size_t>, std::shared_ptr<const Sheet>> sheets;
    std::optional<std::array<double, 3>> constants;
  };

  template <class F>
  static double integrate(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-12);
  }

  double raw_pressure(int i, double x, double y) const {
    const auto& p = X_.params;
    const double rho = i == 0 ? p.rho1 : i == 1 ? p.rho2 : p.rho3;
    return -(p.mu / p.k) * path_work(i, x, y) - rho * p.g * y;
  }

  std::array<double, 3> constants() const {
    {
      std::lock_guard lock(cache_->m);
      if (cache_->constants) return *cache_->constants;
    }
    // match the neighbouring phase on each interface at x = 0 (computed
    // unlocked: the path integrals take the sheet lock themselves)
    const double yf = upper(0.0), yh = lower(0.0);
    const double c1 = raw_pressure(1, 0.0, yf) - raw_pressure(0, 0.0, yf);
    const double c3 = raw_pressure(1, 0.0, yh) - raw_pressure(2, 0.0, yh);
    std::lock_guard lock(cache_->m);
    if (!cache_->constants) cache_->constants = std::array<double, 3>{c1, 0.0, c3};
    return *cache_->constants;
  }

  std::shared_ptr<const Sheet> sheet(Interface which, std::size_t R) const {
    const std::pair<int, std::size_t> key{which == Interface::upper ? 0 : 1, R};
    {
      std::lock_guard lock(cache_->m);
      auto it = cache_->sheets.find(key);
      if (it != cache_->sheets.end()) return it->second;
    }
    const GridFunction& u = which == Interface::upper ? X_.f : X_.h;
    const GridFunction fine = upsample(u, R);
    const GridFunction slope = spectral_derivative(fine);
    auto s = std::make_shared<Sheet>();
    const Grid& g = fine.grid();
    const double off = which == Interface::upper ? X_.c_inf() : 0.0;
    s->x.resize(g.size());
    s->y.resize(g.size());
    s->slope.assign(slope.vec().begin(), slope.vec().end());
    for (std::size_t j = 0; j < g.size(); ++j) {
      s->x[j] = g.node(j);
      s->y[j] = fine[j] + off;
    }
    s->weight = g.spacing();
    std::lock_guard lock(cache_->m);
    return cache_->sheets.emplace(key, std::move(s)).first->second;
  }

  // {int -d Q slope, int F slope} over one sheet
  std::array<double, 2> sheet_integral(Interface which, double x, double y, std::size_t refinement) const {
    const std::size_t R = refinement ? refinement : refinement_for(which, x, y);
    const auto s = sheet(which, R);
    const double P = X_.grid().period();
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t j = 0; j < s->x.size(); ++j) {
      const double sl = s->slope[j];
      if (sl == 0.0) continue;
      const double d = y - s->y[j];
      const auto ph = kernels::Phase::of(x - s->x[j], P);
      if (ph.at_origin && d == 0.0) continue;  // on a node of the sheet
      double q = 0.0, fl = 0.0;
      kernels::eval_first(ph, d, P, q, fl);
      a1 -= d * q * sl;
      a2 += fl * sl;
    }
    return {s->weight * a1, s->weight * a2};
  }

  InterfaceState X_;
  TrigInterpolant fi_, hi_;
  double lip_f_, lip_h_;
  std::unique_ptr<Cache> cache_;
};

inline VelocitySample velocity_at(const InterfaceState& X, const FieldPoint& z) {
  return FieldEvaluator(X).velocity(z.x, z.y);
}

inline double pressure_at(const InterfaceState& X, const FieldPoint& z) { return FieldEvaluator(X).pressure(z.x, z.y); }

struct Trace {
  GridFunction v1;
  GridFunction v2;
};

/// One-sided limit of v on an interface: principal-value self term, smooth
/// cross term and the local jump, which enters with a minus sign above each
/// interface and a plus sign below.
inline Trace velocity_trace(const InterfaceState& X, const PhiParts& r, Interface which, Side side) {
  const double pi = std::numbers::pi;
  const double t1 = X.params.theta1(), t2 = X.params.theta2();
  const double c = X.c_inf();
  const double sgn = side == Side::above ? -1.0 : 1.0;
  if (which == Interface::upper) {
    GridFunction v1 = (-t1 / pi) * r.Bf_poisson - (t2 / pi) * ((X.f + c) * r.C_hp - r.C_hhp);
    GridFunction v2 = (t1 / pi) * r.Bf_flux + (t2 / pi) * r.D_hp;
    const GridFunction q = r.fp * (1.0 / (1.0 + r.fp * r.fp));
    v1 += (sgn * t1) * q;
    v2 += (sgn * t1) * (q * r.fp);
    return {std::move(v1), std::move(v2)};
  }
  GridFunction v1 = (-t2 / pi) * r.Bh_poisson - (t1 / pi) * ((X.h - c) * r.Cp_fp - r.Cp_ffp);
  GridFunction v2 = (t2 / pi) * r.Bh_flux + (t1 / pi) * r.Dp_fp;
  const GridFunction q = r.hp * (1.0 / (1.0 + r.hp * r.hp));
  v1 += (sgn * t2) * q;
  v2 += (sgn * t2) * (q * r.hp);
  return {std::move(v1), std::move(v2)};
}

inline Trace velocity_trace(const InterfaceState& X, Interface which, Side side) {
  return velocity_trace(X, phi_parts(X), which, side);
}

struct FieldIdentityReport {
  double max_divergence = 0.0;
  double max_curl = 0.0;
  std::size_t points = 0;
};

/// Probe points in all three phases, at least `margin` away from both sheets.
inline std::vector<FieldPoint> default_probe_points(const FieldEvaluator& ev, double margin) {
  const auto& X = ev.state();
  const double P = X.grid().period();
  std::vector<FieldPoint> pts;
  for (int k = 0; k < 5; ++k) {
    const double x = -0.5 * P + (k + 0.3) * P / 5.0;
    const double yu = ev.upper(x), yl = ev.lower(x);
    pts.push_back({x, yu + 0.5});
    pts.push_back({x, yl - 0.5});
    if (yu - yl > 2.0 * margin + 1e-12) pts.push_back({x, 0.5 * (yu + yl)});
  }
  return pts;
}

/// Central-difference divergence and curl of v with stencil step h.
inline FieldIdentityReport field_identities_probe(const FieldEvaluator& ev, double h, std::vector<FieldPoint> pts = {}) {
  if (!(h > 0.0)) throw InvalidArgument("field_identities_probe: stencil must be positive");
  if (pts.empty()) pts = default_probe_points(ev, 10.0 * h);
  FieldIdentityReport rep;
  for (const auto& z : pts) {
    // one refinement per stencil so every difference sees the same quadrature
    const std::size_t R = std::max(ev.refinement_for(Interface::upper, z.x, z.y), ev.refinement_for(Interface::lower, z.x, z.y));
    const auto e = ev.velocity_unchecked(z.x + h, z.y, R);
    const auto w = ev.velocity_unchecked(z.x - h, z.y, R);
    const auto n = ev.velocity_unchecked(z.x, z.y + h, R);
    const auto s = ev.velocity_unchecked(z.x, z.y - h, R);
    const double div = (e.v1 - w.v1) / (2 * h) + (n.v2 - s.v2) / (2 * h);
    const double curl = (e.v2 - w.v2) / (2 * h) - (n.v1 - s.v1) / (2 * h);
    rep.max_divergence = std::max(rep.max_divergence, std::abs(div));
    rep.max_curl = std::max(rep.max_curl, std::abs(curl));
    ++rep.points;
  }
  return rep;
}

inline FieldIdentityReport field_identities_probe(const InterfaceState& X, double h) {
  return field_identities_probe(FieldEvaluator(X), h);
}

struct HolderProbeSpec {
  double alpha = 0.4;
  int samples = 8;
  Interface which = Interface::upper;
  Side side = Side::above;
  std::vector<double> scales{1e-2, 1e-3, 1e-4};

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("holder_probe: alpha must lie in (0, 1)");
    if (samples < 1) throw InvalidArgument("holder_probe: need at least one sample");
    if (scales.empty()) throw InvalidArgument("holder_probe: need at least one scale");
  }
};

struct HolderReport {
  std::vector<double> scales;
  std::vector<double> quotient;  // max |v(z) - v(z')| / |z - z'|^alpha at each scale
  double max_quotient = 0.0;
  double sup_velocity = 0.0;
};

/// Hölder quotients of v for point pairs that approach one side of an interface.
inline HolderReport holder_probe(const FieldEvaluator& ev, const HolderProbeSpec& spec) {
  spec.validate();
  const auto& X = ev.state();
  require_admissible(X, "holder_probe");
  const double P = X.grid().period();
  const double sgn = spec.side == Side::above ? 1.0 : -1.0;
  auto curve = [&](double x) { return spec.which == Interface::upper ? ev.upper(x) : ev.lower(x); };
  HolderReport rep;
  for (double r : spec.scales) {
    double q = 0.0;
    for (int k = 0; k < spec.samples; ++k) {
      const double x = -0.5 * P + (k + 0.5) * P / spec.samples;
      const FieldPoint a{x, curve(x) + sgn * r};
      const FieldPoint b{x, curve(x) + sgn * 2.0 * r};
      const FieldPoint c{x + r, curve(x + r) + sgn * r};
      const auto va = ev.velocity_unchecked(a.x, a.y);
      const auto vb = ev.velocity_unchecked(b.x, b.y);
      const auto vc = ev.velocity_unchecked(c.x, c.y);
      auto quot = [&](const VelocitySample& u, const VelocitySample& v, FieldPoint p1, FieldPoint p2) {
        const double dz = std::hypot(p1.x - p2.x, p1.y - p2.y);
        return std::hypot(u.v1 - v.v1, u.v2 - v.v2) / std::pow(dz, spec.alpha);
      };
      q = std::max({q, quot(va, vb, a, b), quot(va, vc, a, c)});
      rep.sup_velocity = std::max({rep.sup_velocity, va.norm(), vb.norm(), vc.norm()});
    }
    rep.scales.push_back(r);
    rep.quotient.push_back(q);
    rep.max_quotient = std::max(rep.max_quotient, q);
  }
  return rep;
}

inline HolderReport holder_probe(const InterfaceState& X, const HolderProbeSpec& spec) {
  return holder_probe(FieldEvaluator(X), spec);
}

}  // namespace muskat
