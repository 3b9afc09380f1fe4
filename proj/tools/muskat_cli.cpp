// muskat: command-line front end.
//
//   muskat simulate       --config run.json [--out DIR]
//   muskat dispersion     [--config run.json] [--modes 1,2,3] [--eps 1e-6] [--out DIR]
//   muskat check-jacobian --config run.json [--eps 1e-5] [--out DIR]
//   muskat identities     --config run.json [--out DIR]
//   muskat field          --config DIR/meta.json --snapshot DIR/snapshots/snap_000010.csv [--out DIR]
//   muskat diagnose       --run DIR [--out DIR]
//
// Exit codes: 0 ok, 1 check failed, 2 config error, 3 contact suspected,
// 4 norm blow-up suspected, 5 numerical failure.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "muskat/commands.hpp"

namespace {

using namespace muskat;

std::vector<int> parse_modes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dash = tok.find('-', 1);
    if (dash != std::string::npos) {
      const int a = std::stoi(tok.substr(0, dash)), b = std::stoi(tok.substr(dash + 1));
      for (int k = a; k <= b; ++k) out.push_back(k);
    } else {
      out.push_back(std::stoi(tok));
    }
  }
  return out;
}

// Loads a config, reporting every violation (also into DIR/meta.json when an
// output directory was given); nullopt means exit 2.
std::optional<RunConfig> load_or_report(const std::string& path, const std::string& out_dir, const char* command) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "muskat: " << e.what() << '\n';
    if (!out_dir.empty()) {
      json meta = {{"version", muskat::version}, {"command", command}, {"config_path", path}};
      meta["errors"] = json::array({error_record(e)});
      meta["exit_code"] = exit_code::config_error;
      try {
        write_text(std::filesystem::path(out_dir) / "meta.json", meta.dump(2) + "\n");
      } catch (const std::exception& w) {
        std::cerr << "muskat: " << w.what() << '\n';
      }
    }
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-phase Muskat simulator"};
  app.set_version_flag("--version", std::string(muskat::version));
  app.require_subcommand(1);

  std::string config_path, out_dir, modes = "1-8", snapshot, run_dir;
  std::optional<double> eps;
  bool quiet = false;
  std::size_t nx = 64, ny = 48;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory (default: output.directory of the config)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* sim = app.add_subcommand("simulate", "integrate a configured run and write its run directory");
  sim->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  add_common(sim);

  auto* disp = app.add_subcommand("dispersion", "measured vs predicted decay rates of the flat state");
  disp->add_option("--config", config_path, "take physical parameters from this config")->check(CLI::ExistingFile);
  disp->add_option("--modes", modes, "modes, e.g. 1,2,5 or 1-8");
  disp->add_option("--eps", eps, "perturbation amplitude (default 1e-6)");
  add_common(disp);

  auto* jac = app.add_subcommand("check-jacobian", "analytic derivatives vs central finite differences");
  jac->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  jac->add_option("--eps", eps, "step for the error check (default 1e-5)");
  add_common(jac);

  auto* fld = app.add_subcommand("field", "velocity and pressure on a lattice for one snapshot");
  fld->add_option("--config", config_path, "config or meta.json of the run")->required()->check(CLI::ExistingFile);
  fld->add_option("--snapshot", snapshot, "snapshot CSV (x,f,h)")->required()->check(CLI::ExistingFile);
  fld->add_option("--nx", nx, "lattice points in x");
  fld->add_option("--ny", ny, "lattice points in y");
  add_common(fld);

  auto* ids = app.add_subcommand("identities", "layer-potential identity residuals");
  ids->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  add_common(ids);

  auto* diag = app.add_subcommand("diagnose", "surface-area and gap diagnostics of a finished run");
  diag->add_option("--run", run_dir, "run directory written by simulate")->required()->check(CLI::ExistingDirectory);
  add_common(diag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::config_error;
  }

  CommandOptions opt;
  opt.quiet = quiet;

  try {
    if (*disp) {
      PhysicalParams p;
      if (!config_path.empty()) {
        const auto c = load_or_report(config_path, out_dir, "dispersion");
        if (!c) return exit_code::config_error;
        p = c->params;
      }
      std::vector<int> ks;
      try {
        ks = parse_modes(modes);
      } catch (const std::exception&) {
        std::cerr << "muskat: --modes: cannot parse '" << modes << "'\n";
        return exit_code::config_error;
      }
      opt.out = out_dir.empty() ? "dispersion" : out_dir;
      return cmd_dispersion(p, ks, eps.value_or(1e-6), opt);
    }
    if (*diag) {
      opt.out = out_dir.empty() ? std::filesystem::path(run_dir) / "diagnose" : std::filesystem::path(out_dir);
      return cmd_diagnose(run_dir, opt);
    }

    const auto c = load_or_report(config_path, out_dir, app.get_subcommands().front()->get_name().c_str());
    if (!c) return exit_code::config_error;
    opt.out = out_dir.empty() ? c->output.directory : out_dir;
    if (*sim) return cmd_simulate(*c, opt);
    if (*jac) return cmd_check_jacobian(*c, eps.value_or(1e-5), opt);
    if (*ids) return cmd_identities(*c, opt);
    if (*fld) {
      FieldGridSpec spec;
      spec.nx = nx;
      spec.ny = ny;
      return cmd_field(*c, snapshot, spec, opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "muskat: " << e.what() << '\n';
    return exit_code::numerical_failure;
  }
  return exit_code::config_error;
}
