// Run configuration (JSON), initial profiles and run-directory artifacts:
// meta.json, series.csv, snapshots/snap_<step>.csv, field_<step>.csv.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "muskat/error.hpp"
#include "muskat/evolution.hpp"
#include "muskat/field.hpp"
#include "muskat/grid.hpp"
#include "muskat/state.hpp"

namespace muskat {

inline constexpr const char* version = "0.1.0";

inline constexpr const char* series_header =
    "t,dt,gap,dist,hnorm_f,hnorm_h,mean_f,mean_h,himode_frac,surface_area";

using json = nlohmann::ordered_json;

/// Every violation found while loading a configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> v) : Error(join(v)), violations_(std::move(v)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration";
    for (const auto& e : v) s += "\n  " + e;
    return s;
  }
  std::vector<std::string> violations_;
};

struct GridSpec {
  std::size_t n_points = 256;
  double period = 2.0 * std::numbers::pi;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class ProfileKind { flat, gaussian_bumps, sinusoid, file };

inline const char* to_string(ProfileKind k) noexcept {
  switch (k) {
    case ProfileKind::flat: return "flat";
    case ProfileKind::gaussian_bumps: return "gaussian_bumps";
    case ProfileKind::sinusoid: return "sinusoid";
    case ProfileKind::file: return "file";
  }
  return "?";
}

/// Initial shape of one interface (the deviation f or h).
struct Profile {
  ProfileKind kind = ProfileKind::flat;
  double amplitude = 0.0;
  double width = 1.0;                  // gaussian_bumps
  std::vector<double> centers{0.0};    // gaussian_bumps
  int k = 1;                           // sinusoid: cos(2 pi k x / P)
  std::string path;                    // file: a snapshot CSV with columns x, f, h

  friend bool operator==(const Profile&, const Profile&) = default;
};

struct OutputSpec {
  std::string directory = "run";
  std::size_t snapshot_stride = 10;  // 0: first and last state only
  std::size_t series_stride = 1;
  std::size_t field_stride = 0;      // in snapshots; 0: no field grids
  std::size_t field_nx = 64;
  std::size_t field_ny = 48;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  PhysicalParams params;
  GridSpec grid;
  Profile f;
  Profile h;
  StepperConfig stepper;
  OutputSpec output;
};

inline bool same_stepper(const StepperConfig& a, const StepperConfig& b) {
  return a.method == b.method && a.dt_initial == b.dt_initial && a.dt_min == b.dt_min &&
         a.cfl_safety == b.cfl_safety && a.t_end == b.t_end && a.gap_floor == b.gap_floor &&
         a.norm_ceiling == b.norm_ceiling && a.monitor_r == b.monitor_r && a.max_steps == b.max_steps &&
         a.state_stride == b.state_stride && a.window_center == b.window_center &&
         a.window_half_width == b.window_half_width;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.params == b.params && a.grid == b.grid && a.f == b.f && a.h == b.h && same_stepper(a.stepper, b.stepper) &&
         a.output == b.output;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size()) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// JSON <-> config

namespace detail {

/// Reads keys from one JSON object, collecting every problem instead of stopping.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where, std::vector<std::string>& errs)
      : j_(j), where_(std::move(where)), errs_(errs) {
    if (!j_.is_object()) errs_.push_back(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out, bool required = false) {
    seen_.emplace_back(key);
    if (!j_.is_object() || !j_.contains(key)) {
      if (required) errs_.push_back(where_ + "." + key + ": missing required key");
      return;
    }
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, int>) {
        if (!v.is_number_integer() || (std::is_same_v<T, std::size_t> && v.get<long long>() < 0)) {
          throw std::invalid_argument(std::is_same_v<T, int> ? "expected an integer" : "expected a non-negative integer");
        }
        out = v.get<T>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
          throw std::invalid_argument("expected an array of numbers");
        }
        out = v.get<std::vector<double>>();
      } else if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (v.is_null()) {
          out.reset();
        } else {
          if (!v.is_number()) throw std::invalid_argument("expected a number or null");
          out = v.get<double>();
        }
      } else {
        static_assert(sizeof(T) == 0, "unsupported config type");
      }
    } catch (const std::exception& e) {
      errs_.push_back(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.emplace_back(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void reject_unknown() {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) errs_.push_back(where_ + "." + k + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& errs_;
  std::vector<std::string> seen_;
};

inline Profile read_profile(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Profile p;
  ObjectReader r(j, where, errs);
  std::string kind = "flat";
  r.get("kind", kind, true);
  if (kind == "flat") {
    p.kind = ProfileKind::flat;
  } else if (kind == "gaussian_bumps") {
    p.kind = ProfileKind::gaussian_bumps;
    r.get("amplitude", p.amplitude, true);
    r.get("width", p.width);
    r.get("centers", p.centers);
    if (!(p.width > 0.0)) errs.push_back(where + ".width: must be positive");
    if (p.centers.empty()) errs.push_back(where + ".centers: needs at least one center");
  } else if (kind == "sinusoid") {
    p.kind = ProfileKind::sinusoid;
    r.get("amplitude", p.amplitude, true);
    r.get("k", p.k, true);
    if (p.k < 0) errs.push_back(where + ".k: must be non-negative");
  } else if (kind == "file") {
    p.kind = ProfileKind::file;
    r.get("path", p.path, true);
  } else {
    errs.push_back(where + ".kind: unknown profile '" + kind + "' (flat, gaussian_bumps, sinusoid, file)");
  }
  if (!std::isfinite(p.amplitude)) errs.push_back(where + ".amplitude: must be finite");
  r.reject_unknown();
  return p;
}

inline json profile_json(const Profile& p) {
  json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case ProfileKind::flat: break;
    case ProfileKind::gaussian_bumps:
      j["amplitude"] = p.amplitude;
      j["width"] = p.width;
      j["centers"] = p.centers;
      break;
    case ProfileKind::sinusoid:
      j["amplitude"] = p.amplitude;
      j["k"] = p.k;
      break;
    case ProfileKind::file: j["path"] = p.path; break;
  }
  return j;
}

}  // namespace detail

/// The documented key layout; every key below "params.rho*" and "grid.n_points"
/// is optional and falls back to the defaults of the structs above.
inline json to_json(const RunConfig& c) {
  json j;
  const auto& p = c.params;
  j["params"] = {{"k", p.k}, {"mu", p.mu}, {"g", p.g}, {"rho1", p.rho1}, {"rho2", p.rho2}, {"rho3", p.rho3},
                 {"c_inf", p.c_inf}};
  j["grid"] = {{"n_points", c.grid.n_points}, {"period", c.grid.period}};
  j["initial"] = {{"f", detail::profile_json(c.f)}, {"h", detail::profile_json(c.h)}};
  const auto& s = c.stepper;
  json st = {{"method", to_string(s.method)},
             {"dt_initial", s.dt_initial},
             {"dt_min", s.dt_min},
             {"cfl_safety", s.cfl_safety},
             {"t_end", s.t_end},
             {"gap_floor", s.gap_floor},
             {"norm_ceiling", s.norm_ceiling},
             {"monitor_r", s.monitor_r},
             {"max_steps", s.max_steps}};
  st["window_center"] = s.window_center ? json(*s.window_center) : json(nullptr);
  st["window_half_width"] = s.window_half_width ? json(*s.window_half_width) : json(nullptr);
  j["stepper"] = st;
  const auto& o = c.output;
  j["output"] = {{"directory", o.directory},     {"snapshot_stride", o.snapshot_stride},
                 {"series_stride", o.series_stride}, {"field_stride", o.field_stride},
                 {"field_nx", o.field_nx},       {"field_ny", o.field_ny}};
  return j;
}

/// Samples both profiles on the configured grid.
inline InterfaceState initial_state(const RunConfig& c);

/// Parses and validates; throws ConfigError listing every violation.  A
/// meta.json is accepted as well (its "config" member is used), so any run
/// directory can be re-run from its own metadata.
inline RunConfig config_from_json(const json& root, const std::filesystem::path& base_dir = {}) {
  std::vector<std::string> errs;
  const json& j = root.is_object() && root.contains("config") && root.contains("version") ? root.at("config") : root;
  RunConfig c;
  detail::ObjectReader top(j, "config", errs);

  if (const json* pj = top.child("params")) {
    detail::ObjectReader r(*pj, "params", errs);
    auto& p = c.params;
    r.get("k", p.k);
    r.get("mu", p.mu);
    r.get("g", p.g);
    r.get("rho1", p.rho1, true);
    r.get("rho2", p.rho2, true);
    r.get("rho3", p.rho3, true);
    r.get("c_inf", p.c_inf);
    r.reject_unknown();
    for (const auto& v : p.violations()) errs.push_back("params: " + v);
  } else {
    errs.emplace_back("params: missing required section");
  }

  if (const json* gj = top.child("grid")) {
    detail::ObjectReader r(*gj, "grid", errs);
    r.get("n_points", c.grid.n_points, true);
    r.get("period", c.grid.period);
    r.reject_unknown();
    const auto n = c.grid.n_points;
    if (n < 16 || (n & (n - 1)) != 0) errs.push_back("grid.n_points: must be a power of two >= 16");
    if (!(c.grid.period > 0.0 && std::isfinite(c.grid.period))) errs.emplace_back("grid.period: must be positive");
  } else {
    errs.emplace_back("grid: missing required section");
  }

  if (const json* ij = top.child("initial")) {
    detail::ObjectReader r(*ij, "initial", errs);
    if (const json* fj = r.child("f")) c.f = detail::read_profile(*fj, "initial.f", errs);
    if (const json* hj = r.child("h")) c.h = detail::read_profile(*hj, "initial.h", errs);
    r.reject_unknown();
    // file profiles are stored absolute so the config means the same thing from any directory
    for (Profile* p : {&c.f, &c.h}) {
      if (p->kind == ProfileKind::file && !p->path.empty()) {
        std::filesystem::path path(p->path);
        if (path.is_relative()) path = base_dir / path;
        p->path = std::filesystem::absolute(path).lexically_normal().string();
      }
    }
  }

  if (const json* sj = top.child("stepper")) {
    detail::ObjectReader r(*sj, "stepper", errs);
    auto& s = c.stepper;
    std::string method = to_string(s.method);
    r.get("method", method);
    if (method == "rk4") {
      s.method = Method::rk4;
    } else if (method == "rk2_imex") {
      s.method = Method::rk2_imex;
    } else {
      errs.push_back("stepper.method: unknown method '" + method + "' (rk4, rk2_imex)");
    }
    r.get("dt_initial", s.dt_initial);
    r.get("dt_min", s.dt_min);
    r.get("cfl_safety", s.cfl_safety);
    r.get("t_end", s.t_end);
    r.get("gap_floor", s.gap_floor);
    r.get("norm_ceiling", s.norm_ceiling);
    r.get("monitor_r", s.monitor_r);
    r.get("max_steps", s.max_steps);
    r.get("window_center", s.window_center);
    r.get("window_half_width", s.window_half_width);
    r.reject_unknown();
  }

  if (const json* oj = top.child("output")) {
    detail::ObjectReader r(*oj, "output", errs);
    auto& o = c.output;
    r.get("directory", o.directory);
    r.get("snapshot_stride", o.snapshot_stride);
    r.get("series_stride", o.series_stride);
    r.get("field_stride", o.field_stride);
    r.get("field_nx", o.field_nx);
    r.get("field_ny", o.field_ny);
    r.reject_unknown();
    if (o.series_stride == 0) errs.emplace_back("output.series_stride: must be positive");
    if (o.field_stride > 0 && (o.field_nx < 2 || o.field_ny < 2)) {
      errs.emplace_back("output.field_nx/field_ny: need at least 2 points each");
    }
  }
  top.reject_unknown();
  c.stepper.state_stride = c.output.snapshot_stride;
  for (const auto& v : c.stepper.violations()) errs.push_back("stepper: " + v);

  // the initial data is only meaningful once the pieces it depends on are valid
  if (errs.empty()) {
    try {
      const auto X = initial_state(c);
      require_admissible(X, "initial data");
      if (!(admissibility_gap(X) > c.stepper.gap_floor)) {
        errs.push_back("stepper.gap_floor: must be below the initial gap " + fmt_double(admissibility_gap(X)));
      }
    } catch (const Error& e) {
      errs.emplace_back(e.what());
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return config_from_json(j, path.parent_path());
}

inline void write_config(const RunConfig& c, const std::filesystem::path& path) {
  write_text(path, to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Profiles

inline GridFunction sample_profile(const Profile& p, const Grid& g, const char* column) {
  const double P = g.period();
  switch (p.kind) {
    case ProfileKind::flat: return GridFunction(g);
    case ProfileKind::gaussian_bumps:
      return GridFunction::sample(g, [&](double x) {
        double s = 0.0;
        for (double c : p.centers) {
          const double t = std::remainder(x - c, P) / p.width;  // nearest periodic image
          s += std::exp(-t * t);
        }
        return p.amplitude * s;
      });
    case ProfileKind::sinusoid:
      return GridFunction::sample(g, [&](double x) { return p.amplitude * std::cos(2.0 * std::numbers::pi * p.k * x / P); });
    case ProfileKind::file: {
      const std::filesystem::path path(p.path);
      const auto t = read_csv(path);
      if (t.rows.size() != g.size()) {
        throw InvalidArgument(path.string() + ": " + std::to_string(t.rows.size()) + " rows for a grid of " +
                              std::to_string(g.size()));
      }
      const auto x = t.values("x");
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (std::abs(x[j] - g.node(j)) > 1e-9 * P) {
          throw InvalidArgument(path.string() + ": x column does not match the grid nodes");
        }
      }
      return GridFunction(g, t.values(column));
    }
  }
  return GridFunction(g);
}

inline InterfaceState initial_state(const RunConfig& c) {
  const Grid g(c.grid.n_points, c.grid.period);
  return InterfaceState(sample_profile(c.f, g, "f"), sample_profile(c.h, g, "h"), c.params);
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::string series_csv(const std::vector<RunRow>& rows, std::size_t stride = 1) {
  if (stride == 0) throw InvalidArgument("series_csv: stride must be positive");
  std::string s = std::string(series_header) + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i % stride != 0 && i + 1 != rows.size()) continue;
    const auto& r = rows[i];
    for (double v : {r.t, r.dt, r.gap, r.dist, r.hnorm_f, r.hnorm_h, r.mean_f, r.mean_h, r.himode_frac}) {
      s += fmt_double(v);
      s += ',';
    }
    s += fmt_double(r.surface_area);
    s += '\n';
  }
  return s;
}

inline std::vector<RunRow> read_series(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  std::string header;
  for (std::size_t i = 0; i < t.header.size(); ++i) header += (i ? "," : "") + t.header[i];
  if (header != series_header) throw InvalidArgument(path.string() + ": unexpected series header");
  std::vector<RunRow> rows;
  for (const auto& v : t.rows) rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
  return rows;
}

inline std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.csv", step);
  return buf;
}

inline std::string snapshot_csv(const Snapshot& s) {
  std::string out = "x,f,h\n";
  const Grid& g = s.f.grid();
  for (std::size_t j = 0; j < g.size(); ++j) {
    out += fmt_double(g.node(j)) + "," + fmt_double(s.f[j]) + "," + fmt_double(s.h[j]) + "\n";
  }
  return out;
}

/// A snapshot file back on the grid it was written from.
inline Snapshot read_snapshot(const std::filesystem::path& path, const GridSpec& grid) {
  const Grid g(grid.n_points, grid.period);
  const auto t = read_csv(path);
  if (t.rows.size() != g.size()) throw InvalidArgument(path.string() + ": row count does not match the grid");
  Snapshot s;
  s.f = GridFunction(g, t.values("f"));
  s.h = GridFunction(g, t.values("h"));
  const auto stem = path.stem().string();
  if (stem.rfind("snap_", 0) == 0) s.step = std::stoul(stem.substr(5));
  return s;
}

struct FieldGridSpec {
  std::size_t nx = 64;
  std::size_t ny = 48;
  double margin = 0.5;  // extends the y range beyond both interfaces
};

/// Velocity and pressure on a uniform (x, y) lattice spanning one period.
/// Points inside the exclusion zone of an interface are skipped.
inline std::string field_csv(const InterfaceState& X, const FieldGridSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2) throw InvalidArgument("field grid: need at least 2 points per direction");
  const FieldEvaluator ev(X);
  const Grid& g = X.grid();
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (std::size_t j = 0; j < g.size(); ++j) {
    ylo = std::min(ylo, X.h[j]);
    yhi = std::max(yhi, X.c_inf() + X.f[j]);
  }
  ylo -= spec.margin;
  yhi += spec.margin;
  std::string out = "x,y,v1,v2,p\n";
  for (std::size_t iy = 0; iy < spec.ny; ++iy) {
    const double y = ylo + (yhi - ylo) * static_cast<double>(iy) / static_cast<double>(spec.ny - 1);
    for (std::size_t ix = 0; ix < spec.nx; ++ix) {
      const double x = g.node(0) + g.period() * static_cast<double>(ix) / static_cast<double>(spec.nx);
      try {
        const auto v = ev.velocity(x, y);
        const double p = ev.pressure(x, y);
        out += fmt_double(x) + "," + fmt_double(y) + "," + fmt_double(v.v1) + "," + fmt_double(v.v2) + "," +
               fmt_double(p) + "\n";
      } catch (const TooCloseError&) {
      }
    }
  }
  return out;
}

/// meta.json for a run directory; status fields are filled by the caller.
inline json run_meta(const RunConfig& c, const std::string& command) {
  json m;
  m["version"] = version;
  m["command"] = command;
  m["config"] = to_json(c);
  m["errors"] = json::array();
  return m;
}

inline json error_record(const std::exception& e) {
  std::string kind = "error";
  if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
  else if (dynamic_cast<const AdmissibilityError*>(&e)) kind = "admissibility";
  else if (dynamic_cast<const NumericalFailure*>(&e)) kind = "numerical";
  else if (dynamic_cast<const InvalidArgument*>(&e)) kind = "invalid_argument";
  json j = {{"kind", kind}, {"message", e.what()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) j["violations"] = ce->violations();
  if (const auto* a = dynamic_cast<const AdmissibilityError*>(&e)) {
    j["node"] = a->node();
    j["gap"] = a->gap();
  }
  return j;
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return json::parse(in);
}

/// Writes series.csv, the snapshots and (when asked) field grids of a run.
/// Returns the snapshot index for meta.json: step, time and file of each state.
inline json write_run_artifacts(const std::filesystem::path& dir, const RunConfig& c, const RunResult& r) {
  std::filesystem::create_directories(dir / "snapshots");
  write_text(dir / "series.csv", series_csv(r.record.rows, c.output.series_stride));
  json index = json::array();
  std::size_t k = 0;
  for (const auto& s : r.record.snapshots) {
    const std::string file = "snapshots/" + snapshot_name(s.step);
    write_text(dir / file, snapshot_csv(s));
    json entry = {{"step", s.step}, {"t", s.t}, {"file", file}};
    if (c.output.field_stride > 0 && (k % c.output.field_stride == 0 || &s == &r.record.snapshots.back())) {
      char name[32];
      std::snprintf(name, sizeof name, "field_%06zu.csv", s.step);
      write_text(dir / name, field_csv(InterfaceState(s.f, s.h, c.params), {c.output.field_nx, c.output.field_ny}));
      entry["field"] = name;
    }
    index.push_back(std::move(entry));
    ++k;
  }
  return index;
}

}  // namespace muskat
