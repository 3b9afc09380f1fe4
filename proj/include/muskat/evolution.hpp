// Time integration of dX/dt = Phi(X) with admissibility guards and the
// blow-up / contact monitors.
//
// rk4 is classical RK4.  rk2_imex is ARS(2,2,2): the flat diagonal symbol
// L = diag(T1 |D|, T2 |D|) is treated implicitly (a Fourier-diagonal solve),
// the remainder Phi - L X explicitly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "muskat/error.hpp"
#include "muskat/field.hpp"
#include "muskat/grid.hpp"
#include "muskat/rhs.hpp"
#include "muskat/state.hpp"

namespace muskat {

enum class Method { rk4, rk2_imex };

inline const char* to_string(Method m) noexcept { return m == Method::rk4 ? "rk4" : "rk2_imex"; }

enum class RunStatus { completed, contact_suspected, norm_blowup_suspected, stiffness_abort };

inline const char* to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::contact_suspected: return "contact_suspected";
    case RunStatus::norm_blowup_suspected: return "norm_blowup_suspected";
    case RunStatus::stiffness_abort: return "stiffness_abort";
  }
  return "?";
}

struct StepperConfig {
  Method method = Method::rk4;
  double dt_initial = 1e-3;
  double dt_min = 1e-9;
  double cfl_safety = 0.5;
  double t_end = 1.0;
  double gap_floor = 1e-3;
  double norm_ceiling = 1e3;
  double monitor_r = 1.75;
  std::size_t max_steps = 1000000;
  std::size_t state_stride = 1;             // keep every n-th accepted state in the record (0: none)
  std::optional<double> window_center;      // surface-area window; default: argmin of the initial gap
  std::optional<double> window_half_width;  // default: P / 8

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(dt_initial > 0.0)) v.emplace_back("dt_initial must be positive");
    if (!(dt_min > 0.0 && dt_min < dt_initial)) v.emplace_back("dt_min must satisfy 0 < dt_min < dt_initial");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) v.emplace_back("cfl_safety must lie in (0, 1]");
    if (!(t_end >= 0.0)) v.emplace_back("t_end must be non-negative");
    if (!(gap_floor > 0.0)) v.emplace_back("gap_floor must be positive");
    if (!(norm_ceiling > 0.0)) v.emplace_back("norm_ceiling must be positive");
    if (!(monitor_r >= 0.0 && monitor_r <= 2.0)) v.emplace_back("monitor_r must lie in [0, 2]");
    if (max_steps == 0) v.emplace_back("max_steps must be positive");
    if (window_half_width && !(*window_half_width > 0.0)) v.emplace_back("window_half_width must be positive");
    return v;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw InvalidArgument("stepper config: " + v.front());
  }
};

/// The largest stable step for the first-order principal symbol.
inline double cfl_dt(const InterfaceState& X, double safety) {
  const double s = std::abs(X.params.theta1()) + std::abs(X.params.theta2());
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return safety * X.grid().spacing() / s;
}

namespace detail {

inline InterfaceState axpy(const InterfaceState& X, double a, const Phi& k) {
  return InterfaceState(X.f + a * k.phi1, X.h + a * k.phi2, X.params);
}

// (I - a L)^{-1} applied to one component, L = theta |D|.
inline GridFunction implicit_solve(const GridFunction& u, double a, double theta) {
  return apply_symbol(u, [&](double k) { return cplx(1.0 / (1.0 - a * theta * std::abs(k)), 0.0); },
                      1.0 / (1.0 - a * theta * std::numbers::pi / u.grid().spacing()));
}

inline GridFunction stiff_part(const GridFunction& u, double theta) {
  return apply_symbol(u, [&](double k) { return cplx(theta * std::abs(k), 0.0); }, theta * std::numbers::pi / u.grid().spacing());
}

inline bool finite(const InterfaceState& X) {
  for (std::size_t j = 0; j < X.f.size(); ++j) {
    if (!std::isfinite(X.f[j]) || !std::isfinite(X.h[j])) return false;
  }
  return true;
}

}  // namespace detail

inline InterfaceState rk4_step(const InterfaceState& X, double dt) {
  const auto k1 = compute_phi(X);
  const auto k2 = compute_phi(detail::axpy(X, 0.5 * dt, k1));
  const auto k3 = compute_phi(detail::axpy(X, 0.5 * dt, k2));
  const auto k4 = compute_phi(detail::axpy(X, dt, k3));
  const double w = dt / 6.0;
  return InterfaceState(X.f + w * (k1.phi1 + 2.0 * k2.phi1 + 2.0 * k3.phi1 + k4.phi1),
                        X.h + w * (k1.phi2 + 2.0 * k2.phi2 + 2.0 * k3.phi2 + k4.phi2), X.params);
}

inline InterfaceState imex_step(const InterfaceState& X, double dt) {
  const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
  const double delta = 1.0 - 1.0 / (2.0 * gamma);
  const double t1 = X.params.theta1(), t2 = X.params.theta2();
  auto nonstiff = [&](const InterfaceState& Y) {
    auto p = compute_phi(Y);
    p.phi1 -= detail::stiff_part(Y.f, t1);
    p.phi2 -= detail::stiff_part(Y.h, t2);
    return p;
  };
  const auto n1 = nonstiff(X);
  const InterfaceState Y2(detail::implicit_solve(X.f + (gamma * dt) * n1.phi1, gamma * dt, t1),
                          detail::implicit_solve(X.h + (gamma * dt) * n1.phi2, gamma * dt, t2), X.params);
  const auto n2 = nonstiff(Y2);
  const GridFunction l2f = detail::stiff_part(Y2.f, t1), l2h = detail::stiff_part(Y2.h, t2);
  const GridFunction rf = X.f + dt * (delta * n1.phi1 + (1.0 - delta) * n2.phi1 + (1.0 - gamma) * l2f);
  const GridFunction rh = X.h + dt * (delta * n1.phi2 + (1.0 - delta) * n2.phi2 + (1.0 - gamma) * l2h);
  return InterfaceState(detail::implicit_solve(rf, gamma * dt, t1), detail::implicit_solve(rh, gamma * dt, t2), X.params);
}

/// One unguarded step.
inline InterfaceState tentative_step(const InterfaceState& X, double dt, Method m) {
  return m == Method::rk4 ? rk4_step(X, dt) : imex_step(X, dt);
}

/// `steps` unguarded steps of size dt (convergence studies).
inline InterfaceState integrate_fixed(InterfaceState X, double dt, std::size_t steps, Method m) {
  for (std::size_t i = 0; i < steps; ++i) X = tentative_step(X, dt, m);
  return X;
}

/// Why a guarded step gave up; carries the last accepted state.
class StepAbort : public NumericalFailure {
 public:
  StepAbort(const std::string& what, RunStatus reason, InterfaceState last)
      : NumericalFailure(what), reason_(reason), last_(std::move(last)) {}
  RunStatus reason() const noexcept { return reason_; }
  const InterfaceState& last_state() const noexcept { return last_; }

 private:
  RunStatus reason_;
  InterfaceState last_;
};

struct StepOutcome {
  InterfaceState state;
  double dt = 0.0;  // step actually taken
  int rejections = 0;
};

/// Guarded step: halves dt while the tentative state is non-finite, inadmissible
/// or within the gap floor.  Below dt_min it aborts with contact_suspected (gap
/// rejections) or stiffness_abort (anything else).
inline StepOutcome step(const InterfaceState& X, double dt, const StepperConfig& cfg) {
  StepOutcome out;
  bool gap_cause = false;  // cause of the most recent rejection
  for (;;) {
    if (dt < cfg.dt_min) {
      const bool gap = gap_cause;
      throw StepAbort(gap ? "step: gap floor reached with dt below dt_min" : "step: dt below dt_min (stiffness)",
                      gap ? RunStatus::contact_suspected : RunStatus::stiffness_abort, X);
    }
    std::optional<InterfaceState> Y;
    bool gap_reject = false;
    try {
      Y = tentative_step(X, dt, cfg.method);
    } catch (const AdmissibilityError&) {
      gap_reject = true;  // an intermediate stage left the phase space
    }
    if (Y) {
      if (!detail::finite(*Y)) {
        Y.reset();
      } else if (admissibility_gap(*Y) <= cfg.gap_floor) {
        Y.reset();
        gap_reject = true;
      }
    }
    if (Y) {
      out.state = std::move(*Y);
      out.dt = dt;
      return out;
    }
    ++out.rejections;
    gap_cause = gap_reject;
    dt *= 0.5;
  }
}

/// min over node pairs of the Euclidean distance between the curves
/// (x, c + f(x)) and (x', h(x')), x-distance taken periodically, then refined
/// continuously around the best pairs.
inline double interface_distance(const InterfaceState& X) {
  const Grid& g = X.grid();
  const std::size_t N = g.size();
  const double P = g.period(), hx = g.spacing(), c = X.c_inf();
  std::vector<double> best(N, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> partner(N, 0);
  for (std::size_t i = 0; i < N; ++i) {
    const double yi = c + X.f[i];
    for (std::size_t j = 0; j < N; ++j) {
      const double dx = std::remainder(g.node(i) - g.node(j), P);
      const double dy = yi - X.h[j];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best[i]) {
        best[i] = d2;
        partner[i] = j;
      }
    }
  }
  double result = std::sqrt(*std::min_element(best.begin(), best.end()));
  // refine the lowest local minima of the node profile
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < N; ++i) {
    const double l = best[(i + N - 1) % N], r = best[(i + 1) % N];
    if (best[i] <= l && best[i] <= r) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return best[a] < best[b]; });
  if (cand.size() > 4) cand.resize(4);
  const TrigInterpolant fi(X.f), hi(X.h);
  const int bits = std::numeric_limits<double>::digits / 2 + 4;
  for (std::size_t i : cand) {
    const double xi = g.node(i);
    const double xj = xi - std::remainder(xi - g.node(partner[i]), P);  // nearest image of the partner
    auto closest = [&](double x) {
      const double y = c + fi(x);
      auto d2 = [&](double xp) {
        const double dy = y - hi(xp);
        return (x - xp) * (x - xp) + dy * dy;
      };
      return boost::math::tools::brent_find_minima(d2, xj - 1.5 * hx, xj + 1.5 * hx, bits).second;
    };
    const double d2 = boost::math::tools::brent_find_minima(closest, xi - 1.5 * hx, xi + 1.5 * hx, bits).second;
    result = std::min(result, std::sqrt(std::max(d2, 0.0)));
  }
  return result;
}

/// Spectral energy above mode N/4, as a fraction of the total, over both interfaces.
inline double high_mode_fraction(const InterfaceState& X) {
  double hi = 0.0, total = 0.0;
  for (const GridFunction* u : {&X.f, &X.h}) {
    const auto c = detail::coefficients(*u);
    const std::size_t n = c.size();
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t mm = m <= n / 2 ? m : n - m;
      const double e = std::norm(c[m]);
      total += e;
      if (mm > n / 4) hi += e;
    }
  }
  return total > 0.0 ? hi / total : 0.0;
}

/// S = int_{x0 - R}^{x0 + R} (c + f - h) dx.
inline double surface_area(const InterfaceState& X, double x0, double R) {
  if (!(R >= 0.0) || 2.0 * R > X.grid().period()) throw InvalidArgument("surface_area: window must fit in one period");
  const GridFunction w = (X.f - X.h) + X.c_inf();
  return TrigInterpolant(w).integral(x0 - R, x0 + R);
}

struct RunRow {
  double t = 0.0;
  double dt = 0.0;
  double gap = 0.0;
  double dist = 0.0;
  double hnorm_f = 0.0;
  double hnorm_h = 0.0;
  double mean_f = 0.0;
  double mean_h = 0.0;
  double himode_frac = 0.0;
  double surface_area = 0.0;

  friend bool operator==(const RunRow&, const RunRow&) = default;
};

struct Snapshot {
  std::size_t step = 0;
  double t = 0.0;
  GridFunction f;
  GridFunction h;
};

struct RunRecord {
  std::vector<RunRow> rows;            // row 0 is the initial state
  std::vector<Snapshot> snapshots;     // every state_stride-th accepted step, plus first and last
  double window_center = 0.0;
  double window_half_width = 0.0;
  PhysicalParams params;
};

struct RunResult {
  RunRecord record;
  RunStatus status = RunStatus::completed;
  InterfaceState final_state;
  std::string message;
  std::size_t rejections = 0;
};

inline RunRow monitor_row(const InterfaceState& X, double t, double dt, const StepperConfig& cfg, double x0, double R) {
  RunRow r;
  r.t = t;
  r.dt = dt;
  r.gap = admissibility_gap(X);
  r.dist = interface_distance(X);
  r.hnorm_f = sobolev_norm(X.f, cfg.monitor_r);
  r.hnorm_h = sobolev_norm(X.h, cfg.monitor_r);
  r.mean_f = mean(X.f);
  r.mean_h = mean(X.h);
  r.himode_frac = high_mode_fraction(X);
  r.surface_area = surface_area(X, x0, R);
  return r;
}

/// Integrates to t_end or until a monitor trips.
inline RunResult run(const InterfaceState& X0, const StepperConfig& cfg) {
  cfg.validate();
  X0.params.validate();
  require_finite(X0.f, "run f");
  require_finite(X0.h, "run h");
  require_admissible(X0, "run");
  const double gap0 = admissibility_gap(X0);
  if (!(cfg.gap_floor < gap0)) throw InvalidArgument("run: gap_floor must be below the initial gap");

  const Grid& g = X0.grid();
  RunResult res;
  auto& rec = res.record;
  rec.params = X0.params;
  if (cfg.window_center) {
    rec.window_center = *cfg.window_center;
  } else {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < g.size(); ++j) {
      if (X0.c_inf() + X0.f[j] - X0.h[j] < X0.c_inf() + X0.f[arg] - X0.h[arg]) arg = j;
    }
    rec.window_center = g.node(arg);
  }
  rec.window_half_width = cfg.window_half_width.value_or(g.period() / 8.0);
  if (2.0 * rec.window_half_width > g.period()) throw InvalidArgument("run: surface-area window wider than the period");

  auto row = [&](const InterfaceState& X, double t, double dt) {
    return monitor_row(X, t, dt, cfg, rec.window_center, rec.window_half_width);
  };
  auto keep = [&](std::size_t step, double t, const InterfaceState& X) {
    rec.snapshots.push_back({step, t, X.f, X.h});
  };

  InterfaceState X = X0;
  double t = 0.0;
  rec.rows.push_back(row(X, 0.0, 0.0));
  if (cfg.state_stride) keep(0, 0.0, X);
  if (rec.rows.back().hnorm_f + rec.rows.back().hnorm_h > cfg.norm_ceiling) {
    res.status = RunStatus::norm_blowup_suspected;
    res.message = "initial norm above norm_ceiling";
    res.final_state = X;
    return res;
  }

  const double dt_cap = std::min(cfg.dt_initial, cfl_dt(X0, cfg.cfl_safety));
  double dt_nominal = dt_cap;
  int streak = 0;
  std::size_t n = 0;
  bool last_kept = true;
  while (t < cfg.t_end) {
    if (n >= cfg.max_steps) {
      res.status = RunStatus::stiffness_abort;
      res.message = "max_steps reached before t_end";
      break;
    }
    // land exactly on t_end without a sliver step
    double dt = std::min(dt_nominal, cfg.t_end - t);
    if (cfg.t_end - t - dt < 1e-12 * std::max(1.0, cfg.t_end)) dt = cfg.t_end - t;
    StepOutcome s;
    try {
      s = step(X, dt, cfg);
    } catch (const StepAbort& e) {
      res.status = e.reason();
      res.message = e.what();
      break;
    }
    res.rejections += static_cast<std::size_t>(s.rejections);
    if (s.rejections > 0) {
      dt_nominal = s.dt;
      streak = 0;
    } else if (++streak >= 4 && dt_nominal < dt_cap) {
      dt_nominal = std::min(2.0 * dt_nominal, dt_cap);
      streak = 0;
    }
    X = std::move(s.state);
    t = s.dt == cfg.t_end - t ? cfg.t_end : t + s.dt;
    ++n;
    rec.rows.push_back(row(X, t, s.dt));
    last_kept = cfg.state_stride && n % cfg.state_stride == 0;
    if (last_kept) keep(n, t, X);
    if (rec.rows.back().hnorm_f + rec.rows.back().hnorm_h > cfg.norm_ceiling) {
      res.status = RunStatus::norm_blowup_suspected;
      res.message = "H^r norm above norm_ceiling";
      break;
    }
  }
  if (cfg.state_stride && !last_kept) keep(n, t, X);
  res.final_state = X;
  return res;
}

/// sup |v| over the closure of the three phases: |v| is subharmonic and vanishes
/// at infinity, so it is attained on one of the four one-sided traces.
inline double velocity_bound(const InterfaceState& X) {
  const auto parts = phi_parts(X);
  double m = 0.0;
  for (auto which : {Interface::upper, Interface::lower}) {
    for (auto side : {Side::above, Side::below}) {
      const auto t = velocity_trace(X, parts, which, side);
      const auto a = upsample(t.v1, 8), b = upsample(t.v2, 8);
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::hypot(a[i], b[i]));
    }
  }
  return m;
}

struct SquirtDiagnosticSpec {
  double x0 = 0.0;
  double delta = 0.5;
  double c1 = 0.0;  // velocity bound; <= 0 means the largest velocity_bound over the stored states

  void validate() const {
    if (!(delta > 0.0)) throw InvalidArgument("squirt_diagnostic: delta must be positive");
  }
};

struct SquirtReport {
  std::vector<double> t;
  std::vector<double> S;   // S(t) over [x0 - R(t), x0 + R(t)], R(t) = delta + c1 (t - t_final)
  double c1 = 0.0;
  bool non_decreasing = true;   // S' >= 0 toward t_final
  double final_area = 0.0;
  double final_gap = 0.0;
  double near_min_fraction = 0.0;  // share of the window where gap <= 2 min gap at t_final
  double parabolic_fraction = 0.0; // the same share for gmin + gap''(x_min) (x - x_min)^2 / 2
  bool gap_localized = false;      // interior minimum, near-min set at most twice the parabolic one
};

/// Surface-area diagnostic over the stored snapshots whose window is non-empty.
inline SquirtReport squirt_diagnostic(const RunRecord& rec, const SquirtDiagnosticSpec& spec) {
  spec.validate();
  if (rec.snapshots.empty()) throw InvalidArgument("squirt_diagnostic: the record holds no states");
  const auto& last = rec.snapshots.back();
  const Grid& g = last.f.grid();
  if (2.0 * spec.delta > g.period()) throw InvalidArgument("squirt_diagnostic: window leaves the domain");
  SquirtReport rep;
  const InterfaceState Xf(last.f, last.h, rec.params);
  rep.c1 = spec.c1;
  if (!(rep.c1 > 0.0)) {
    // the window must shrink at least as fast as any fluid moves, at every stored time
    for (const auto& s : rec.snapshots) rep.c1 = std::max(rep.c1, velocity_bound(InterfaceState(s.f, s.h, rec.params)));
  }
  const double tf = last.t;
  for (const auto& s : rec.snapshots) {
    const double R = spec.delta + rep.c1 * (s.t - tf);
    if (R <= 0.0) continue;
    rep.t.push_back(s.t);
    rep.S.push_back(surface_area(InterfaceState(s.f, s.h, rec.params), spec.x0, R));
  }
  for (std::size_t i = 1; i < rep.S.size(); ++i) {
    if (rep.S[i] < rep.S[i - 1] - 1e-12 * std::max(1.0, std::abs(rep.S[i - 1]))) rep.non_decreasing = false;
  }
  rep.final_area = rep.S.empty() ? 0.0 : rep.S.back();
  // where the gap sits near its minimum inside the final window
  const GridFunction gap = (Xf.f - Xf.h) + Xf.c_inf();
  const TrigInterpolant gi(gap);
  const int M = 2000;
  const double dx = 2.0 * spec.delta / M;
  std::vector<double> vals(M);
  for (int i = 0; i < M; ++i) vals[i] = gi(spec.x0 - spec.delta + (i + 0.5) * dx);
  const auto imin = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  const double gmin = vals[imin];
  rep.final_gap = gmin;
  const auto near = std::count_if(vals.begin(), vals.end(), [&](double v) { return v <= 2.0 * gmin; });
  rep.near_min_fraction = static_cast<double>(near) / M;
  // a point contact looks parabolic near the minimum; a collapsing segment is much flatter
  const int s = 8;
  if (imin >= s && imin + s < M && gmin > 0.0) {
    const double curv = (vals[imin - s] - 2.0 * gmin + vals[imin + s]) / (s * s * dx * dx);
    if (curv > 0.0) {
      rep.parabolic_fraction = 2.0 * std::sqrt(2.0 * gmin / curv) / (2.0 * spec.delta);
      rep.gap_localized = rep.near_min_fraction <= 2.0 * rep.parabolic_fraction;
    }
  }
  return rep;
}

}  // namespace muskat
