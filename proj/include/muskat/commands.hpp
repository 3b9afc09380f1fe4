// The command layer behind the muskat CLI.  Every command writes its artifacts
// plus a meta.json into the output directory and returns a process exit code.
#pragma once

#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "muskat/evolution.hpp"
#include "muskat/field.hpp"
#include "muskat/io.hpp"
#include "muskat/layers.hpp"
#include "muskat/linear.hpp"

namespace muskat {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int config_error = 2;
inline constexpr int contact_suspected = 3;
inline constexpr int norm_blowup_suspected = 4;
inline constexpr int numerical_failure = 5;
}  // namespace exit_code

inline int exit_code_for(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::completed: return exit_code::ok;
    case RunStatus::contact_suspected: return exit_code::contact_suspected;
    case RunStatus::norm_blowup_suspected: return exit_code::norm_blowup_suspected;
    case RunStatus::stiffness_abort: return exit_code::numerical_failure;
  }
  return exit_code::numerical_failure;
}

struct CommandOptions {
  std::filesystem::path out = "run";
  bool quiet = false;
  std::ostream* log = &std::cout;

  void say(const std::string& s) const {
    if (!quiet && log) *log << s << '\n';
  }
};

namespace detail {

/// Runs body, turning library errors into an error record and an exit code;
/// meta.json is written in every case.
inline int guarded(json& meta, const CommandOptions& opt, const std::function<int()>& body) {
  int code = exit_code::numerical_failure;
  try {
    code = body();
  } catch (const ConfigError& e) {
    meta["errors"].push_back(error_record(e));
    code = exit_code::config_error;
  } catch (const std::exception& e) {
    meta["errors"].push_back(error_record(e));
    code = exit_code::numerical_failure;
  }
  meta["exit_code"] = code;
  try {
    write_text(opt.out / "meta.json", meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "muskat: " << e.what() << '\n';
    return exit_code::numerical_failure;
  }
  for (const auto& err : meta["errors"]) std::cerr << "muskat: " << err["message"].get<std::string>() << '\n';
  return code;
}

// Smooth zero-mean direction with k^-2 spectrum; fixed seed for reproducible checks.
inline GridFunction smooth_direction(const Grid& g, std::mt19937_64& rng, int kmax, double amp) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    a[k] = nd(rng) / (k * k);
    b[k] = nd(rng) / (k * k);
  }
  const double w = 2.0 * std::numbers::pi / g.period();
  GridFunction u = GridFunction::sample(g, [&](double x) {
    double s = 0.0;
    for (int k = 1; k <= kmax; ++k) s += a[k] * std::cos(k * w * x) + b[k] * std::sin(k * w * x);
    return s;
  });
  return (amp / std::max(max_abs(u), 1e-300)) * u;
}

}  // namespace detail

inline int cmd_simulate(const RunConfig& c, const CommandOptions& opt) {
  json meta = run_meta(c, "simulate");
  meta["status"] = "error";
  return detail::guarded(meta, opt, [&] {
    const auto X0 = initial_state(c);
    const auto r = run(X0, c.stepper);
    meta["status"] = to_string(r.status);
    meta["message"] = r.message;
    meta["steps"] = r.record.rows.empty() ? 0 : r.record.rows.size() - 1;
    meta["t_final"] = r.record.rows.empty() ? 0.0 : r.record.rows.back().t;
    meta["rejections"] = r.rejections;
    meta["window"] = {{"center", r.record.window_center}, {"half_width", r.record.window_half_width}};
    meta["snapshots"] = write_run_artifacts(opt.out, c, r);
    opt.say("status " + std::string(to_string(r.status)) + " at t = " + fmt_double(meta["t_final"].get<double>()) +
            " after " + std::to_string(meta["steps"].get<std::size_t>()) + " steps" +
            (r.message.empty() ? "" : " (" + r.message + ")"));
    return exit_code_for(r.status);
  });
}

inline int cmd_dispersion(const PhysicalParams& p, const std::vector<int>& modes, double eps, const CommandOptions& opt,
                          double tolerance = 1e-3) {
  json meta;
  meta["version"] = version;
  meta["command"] = "dispersion";
  meta["params"] = {{"k", p.k}, {"mu", p.mu}, {"g", p.g}, {"rho1", p.rho1}, {"rho2", p.rho2}, {"rho3", p.rho3},
                    {"c_inf", p.c_inf}};
  meta["modes"] = modes;
  meta["eps"] = eps;
  meta["tolerance"] = tolerance;
  meta["errors"] = json::array();
  return detail::guarded(meta, opt, [&] {
    const auto rows = dispersion_scan(p, modes, eps);
    std::string csv = "k,predicted_minus,predicted_plus,measured_minus,measured_plus,rel_error\n";
    bool ok = true;
    opt.say("   k   predicted-      measured-       predicted+      measured+       rel.err");
    for (const auto& r : rows) {
      csv += std::to_string(r.k) + "," + fmt_double(r.predicted_minus) + "," + fmt_double(r.predicted_plus) + "," +
             fmt_double(r.measured_minus) + "," + fmt_double(r.measured_plus) + "," + fmt_double(r.rel_error()) + "\n";
      ok = ok && r.rel_error() <= tolerance;
      char line[160];
      std::snprintf(line, sizeof line, "%4d  %+.8f  %+.8f  %+.8f  %+.8f  %.2e", r.k, r.predicted_minus,
                    r.measured_minus, r.predicted_plus, r.measured_plus, r.rel_error());
      opt.say(line);
    }
    write_text(opt.out / "dispersion.csv", csv);
    meta["passed"] = ok;
    return ok ? exit_code::ok : exit_code::check_failed;
  });
}

/// Analytic derivatives vs central differences at the configured initial state,
/// along a fixed pseudo-random smooth direction.
inline int cmd_check_jacobian(const RunConfig& c, double eps, const CommandOptions& opt) {
  json meta = run_meta(c, "check-jacobian");
  meta["eps"] = eps;
  return detail::guarded(meta, opt, [&] {
    const auto X = initial_state(c);
    std::mt19937_64 rng(20240607);
    const Direction Y{detail::smooth_direction(X.grid(), rng, 6, 1.0), detail::smooth_direction(X.grid(), rng, 6, 1.0)};
    JacobianSpec spec;
    spec.check_eps = eps;
    const auto checks = jacobian_checks(X, Y, spec);
    std::string csv = "name,rel_error,order,passed\n";
    bool ok = true;
    for (const auto& ch : checks) {
      csv += ch.name + "," + fmt_double(ch.rel_error) + "," + fmt_double(ch.order) + "," + (ch.passed ? "1" : "0") + "\n";
      ok = ok && ch.passed;
      char line[160];
      std::snprintf(line, sizeof line, "%-22s rel.err %.2e  order %.3f  %s", ch.name.c_str(), ch.rel_error, ch.order,
                    ch.passed ? "ok" : "FAILED");
      opt.say(line);
    }
    write_text(opt.out / "jacobian.csv", csv);
    meta["passed"] = ok;
    return ok ? exit_code::ok : exit_code::check_failed;
  });
}

/// Layer-potential identities at the configured initial state against a nearby
/// state, with a Gaussian density.
inline int cmd_identities(const RunConfig& c, const CommandOptions& opt, double tolerance = 1e-7) {
  json meta = run_meta(c, "identities");
  meta["tolerance"] = tolerance;
  return detail::guarded(meta, opt, [&] {
    const auto X = initial_state(c);
    const Grid& g = X.grid();
    std::mt19937_64 rng(7);
    // keep the companion state well inside the admissible set
    const double amp = 0.05 * admissibility_gap(X);
    const auto Xt = perturbed(X, detail::smooth_direction(g, rng, 6, 1.0), detail::smooth_direction(g, rng, 6, 1.0), amp);
    const auto w = GridFunction::sample(g, [&](double x) {
      const double t = std::remainder(x, g.period());
      return std::exp(-t * t);
    });
    const auto rep = identity_report(X, Xt, w, tolerance);
    std::string csv = "name,residual,scale,passed\n";
    for (const auto& ch : rep.checks) {
      csv += ch.name + "," + fmt_double(ch.residual) + "," + fmt_double(ch.scale) + "," + (ch.passed ? "1" : "0") + "\n";
      char line[160];
      std::snprintf(line, sizeof line, "%-28s residual %.2e  %s", ch.name.c_str(), ch.residual, ch.passed ? "ok" : "FAILED");
      opt.say(line);
    }
    write_text(opt.out / "identities.csv", csv);
    meta["max_residual"] = rep.max_residual();
    meta["passed"] = rep.all_passed();
    return rep.all_passed() ? exit_code::ok : exit_code::check_failed;
  });
}

/// Velocity and pressure on a lattice for one stored snapshot.
inline int cmd_field(const RunConfig& c, const std::filesystem::path& snapshot, const FieldGridSpec& grid,
                     const CommandOptions& opt) {
  json meta = run_meta(c, "field");
  meta["snapshot"] = snapshot.string();
  meta["field_grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"margin", grid.margin}};
  return detail::guarded(meta, opt, [&] {
    const auto s = read_snapshot(snapshot, c.grid);
    const InterfaceState X(s.f, s.h, c.params);
    require_admissible(X, "field");
    char name[32];
    std::snprintf(name, sizeof name, "field_%06zu.csv", s.step);
    write_text(opt.out / name, field_csv(X, grid));
    meta["file"] = name;
    opt.say(std::string("wrote ") + (opt.out / name).string());
    return exit_code::ok;
  });
}

/// Re-reads a run directory and reports the surface-area diagnostic over its
/// snapshots.  c1 <= 0 means the largest velocity bound over the stored states.
inline int cmd_diagnose(const std::filesystem::path& run_dir, const CommandOptions& opt, double c1 = 0.0) {
  json meta;
  meta["version"] = version;
  meta["command"] = "diagnose";
  meta["run"] = run_dir.string();
  meta["errors"] = json::array();
  return detail::guarded(meta, opt, [&] {
    const json rm = read_json(run_dir / "meta.json");
    const RunConfig c = config_from_json(rm);
    if (!rm.contains("snapshots") || !rm.contains("window")) {
      throw InvalidArgument(run_dir.string() + ": meta.json has no snapshot index (not a simulate run?)");
    }
    RunRecord rec;
    rec.params = c.params;
    rec.rows = read_series(run_dir / "series.csv");
    rec.window_center = rm["window"]["center"].get<double>();
    rec.window_half_width = rm["window"]["half_width"].get<double>();
    for (const auto& e : rm["snapshots"]) {
      auto s = read_snapshot(run_dir / e["file"].get<std::string>(), c.grid);
      s.step = e["step"].get<std::size_t>();
      s.t = e["t"].get<double>();
      rec.snapshots.push_back(std::move(s));
    }
    const auto rep = squirt_diagnostic(rec, {rec.window_center, rec.window_half_width, c1});
    std::string csv = "t,S\n";
    for (std::size_t i = 0; i < rep.S.size(); ++i) csv += fmt_double(rep.t[i]) + "," + fmt_double(rep.S[i]) + "\n";
    write_text(opt.out / "surface_area.csv", csv);
    meta["run_status"] = rm.value("status", "unknown");
    meta["squirt"] = {{"c1", rep.c1},
                      {"non_decreasing", rep.non_decreasing},
                      {"final_area", rep.final_area},
                      {"final_gap", rep.final_gap},
                      {"near_min_fraction", rep.near_min_fraction},
                      {"parabolic_fraction", rep.parabolic_fraction},
                      {"gap_localized", rep.gap_localized}};
    if (!rec.rows.empty()) {
      double dmin = rec.rows.front().dist;
      for (const auto& r : rec.rows) dmin = std::min(dmin, r.dist);
      meta["min_dist"] = dmin;
    }
    opt.say("run status " + meta["run_status"].get<std::string>() + "; c1 " + fmt_double(rep.c1) + "; S " +
            (rep.non_decreasing ? "non-decreasing" : "NOT monotone") + "; final area " + fmt_double(rep.final_area) +
            "; final gap " + fmt_double(rep.final_gap) + (rep.gap_localized ? " (localized)" : " (not localized)"));
    return exit_code::ok;
  });
}

}  // namespace muskat
