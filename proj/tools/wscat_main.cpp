#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wscat/config.hpp"
#include "wscat/experiments.hpp"

namespace fs = std::filesystem;
using wscat::ConfigJson;

namespace {

struct Opts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  unsigned threads = 1;
  bool dry_run = false;
  std::optional<std::uint64_t> seed;
};

void write_outputs(const fs::path& dir, wscat::ExperimentReport rep,
                   const ConfigJson& resolved, const std::string& sub) {
  fs::create_directories(dir);
  rep.manifest["subcommand"] = sub;
  char fp[24];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(
                    wscat::detail::fnv1a(resolved.dump())));
  rep.manifest["config_fingerprint"] = fp;
  rep.manifest["config"] = resolved;
  wscat::write_report_csv(rep, (dir / "report.csv").string());
  wscat::write_manifest(rep.manifest, (dir / "manifest.json").string());
}

int cmd_lp_check(const ConfigJson& resolved, const Opts& o) {
  wscat::LpCheckConfig c = wscat::make_lp_check_config(resolved);
  wscat::Grid grid = c.grid.make();
  wscat::FilterBank bank = c.bank.make(grid);
  const bool pass = bank.lp_residual < c.bank.lp_tol;

  wscat::ExperimentReport rep;
  rep.columns = {"J", "length", "j_max", "coarse_factor", "lp_residual"};
  rep.add_row({static_cast<double>(c.bank.J),
               static_cast<double>(grid.length),
               static_cast<double>(bank.j_max()),
               static_cast<double>(bank.coarse_factor), bank.lp_residual});
  rep.manifest["experiment"] = "lp-check";
  rep.manifest["bank_id"] = bank.id;
  rep.manifest["lp_tol"] = c.bank.lp_tol;
  rep.manifest["pass"] = pass;
  write_outputs(o.output_dir, rep, resolved, "lp-check");

  std::printf("lp_residual = %.17g\n", bank.lp_residual);
  if (!pass) {
    std::fprintf(stderr,
                 "numerical failure: lp_residual %.17g exceeds lp_tol %.17g "
                 "(bank %s)\n",
                 bank.lp_residual, c.bank.lp_tol, bank.id.c_str());
    return 2;
  }
  return 0;
}

int cmd_scatter(const ConfigJson& resolved, const Opts& o) {
  wscat::ScatterConfig c = wscat::make_scatter_config(resolved);
  wscat::Grid grid = c.grid.make();
  wscat::FilterBank bank = c.bank.make(grid);
  wscat::Signal f = wscat::make_signal(c.signal, grid);
  wscat::ScatteringCoefficients sc =
      wscat::scatter(f, bank, c.bank.max_depth, c.bank.path_cap, o.threads);

  wscat::ExperimentReport rep;
  rep.columns = {"m", "layer_u_norm"};
  for (std::size_t m = 0; m < sc.layer_u_norms.size(); ++m)
    rep.add_row({static_cast<double>(m), sc.layer_u_norms[m]});
  rep.manifest["experiment"] = "scatter";
  rep.manifest["bank_id"] = bank.id;
  rep.manifest["paths"] = sc.paths.size();
  rep.manifest["coarse_length"] = sc.coarse_grid.length;
  rep.manifest["f_norm"] = wscat::l2_norm(f);
  rep.manifest["scattering_norm"] = wscat::scattering_norm(sc);
  write_outputs(o.output_dir, rep, resolved, "scatter");
  wscat::write_scattering_csv(sc, (fs::path(o.output_dir) / "profiles").string());

  std::printf("scattered %zu paths (depth %d), ||S f|| = %.17g\n",
              sc.paths.size(), c.bank.max_depth, wscat::scattering_norm(sc));
  return 0;
}

int cmd_deform(const ConfigJson& resolved, const Opts& o) {
  wscat::DeformReportConfig c = wscat::make_deform_config(resolved);
  c.threads = o.threads;
  wscat::DeformReportResult res = wscat::run_deform_report(c);
  write_outputs(o.output_dir, res.report, resolved, "deform");
  fs::create_directories(fs::path(o.output_dir) / "profiles");
  wscat::export_field_csv(res.field,
                          (fs::path(o.output_dir) / "profiles/field.csv").string());
  wscat::export_signal_csv(res.warped,
                           (fs::path(o.output_dir) / "profiles/warped.csv").string());
  std::printf("dist = %.17g\n", res.report.cell(0, "dist"));
  return 0;
}

int cmd_instability(const ConfigJson& resolved, const Opts& o) {
  wscat::InstabilityConfig c = wscat::make_instability_config(resolved);
  c.threads = o.threads;
  wscat::ExperimentReport rep = wscat::run_instability(c);
  write_outputs(o.output_dir, rep, resolved, "instability");

  fs::create_directories(fs::path(o.output_dir) / "profiles");
  wscat::Grid grid = c.grid.make();
  for (int n_osc : c.n_osc_list) {
    wscat::DeformationField tau =
        wscat::oscillatory_bump_field(grid, n_osc, c.amplitude);
    wscat::export_field_csv(
        tau, (fs::path(o.output_dir) / "profiles" /
              ("tau_" + std::to_string(n_osc) + ".csv")).string());
  }
  std::printf("instability: %zu rows\n", rep.rows.size());
  return 0;
}

int cmd_stability(const ConfigJson& resolved, const Opts& o) {
  wscat::StabilityConfig c = wscat::make_stability_config(resolved);
  c.threads = o.threads;
  if (c.signals.empty()) c.signals = wscat::default_stability_signals();
  if (c.fields.empty()) c.fields = wscat::default_stability_fields();
  wscat::ExperimentReport rep = wscat::run_stability_sweep(c);
  write_outputs(o.output_dir, rep, resolved, "stability");

  fs::create_directories(fs::path(o.output_dir) / "profiles");
  wscat::Grid grid = c.grid.make();
  for (std::size_t i = 0; i < c.fields.size(); ++i)
    wscat::export_field_csv(
        wscat::make_field(c.fields[i], grid),
        (fs::path(o.output_dir) / "profiles" /
         ("field_" + std::to_string(i) + ".csv")).string());
  std::printf("stability: %zu rows, max_ratio = %.17g\n", rep.rows.size(),
              rep.manifest.at("max_ratio").get<double>());
  return 0;
}

int cmd_translation(const ConfigJson& resolved, const Opts& o) {
  wscat::TranslationConfig c = wscat::make_translation_config(resolved);
  c.threads = o.threads;
  wscat::ExperimentReport rep = wscat::run_translation(c);
  write_outputs(o.output_dir, rep, resolved, "translation");
  if (rep.manifest.at("log2_slope").is_number())
    std::printf("translation: log2 slope = %.17g\n",
                rep.manifest.at("log2_slope").get<double>());
  else
    std::printf("translation: slope unavailable (zero distances)\n");
  return 0;
}

int cmd_bandlimited(const ConfigJson& resolved, const Opts& o) {
  wscat::BandlimitedConfig c = wscat::make_bandlimited_config(resolved);
  c.threads = o.threads;
  wscat::ExperimentReport rep = wscat::run_bandlimited_lipschitz(c);
  write_outputs(o.output_dir, rep, resolved, "bandlimited");
  fs::create_directories(fs::path(o.output_dir) / "profiles");
  wscat::export_field_csv(
      wscat::make_field(c.tau, c.grid.make()),
      (fs::path(o.output_dir) / "profiles/tau.csv").string());
  if (rep.manifest.at("log_slope").is_number())
    std::printf("bandlimited: log slope = %.17g\n",
                rep.manifest.at("log_slope").get<double>());
  else
    std::printf("bandlimited: slope unavailable (zero distances)\n");
  return 0;
}

int cmd_decay(const ConfigJson& resolved, const Opts& o) {
  wscat::DecayConfig c = wscat::make_decay_config(resolved);
  c.threads = o.threads;
  wscat::ExperimentReport rep = wscat::run_energy_decay(c);
  write_outputs(o.output_dir, rep, resolved, "decay");
  std::printf("decay: %zu rows\n", rep.rows.size());
  return 0;
}

int cmd_commutator(const ConfigJson& resolved, const Opts& o) {
  wscat::CommutatorConfig c = wscat::make_commutator_config(resolved);
  c.threads = o.threads;
  wscat::ExperimentReport rep = wscat::run_commutator(c);
  write_outputs(o.output_dir, rep, resolved, "commutator");

  fs::create_directories(fs::path(o.output_dir) / "profiles");
  wscat::Grid grid = c.grid.make();
  std::vector<wscat::DeformationConfig> fields =
      c.fields.empty() ? wscat::default_commutator_fields() : c.fields;
  for (std::size_t i = 0; i < fields.size(); ++i)
    wscat::export_field_csv(
        wscat::make_field(fields[i], grid),
        (fs::path(o.output_dir) / "profiles" /
         ("field_" + std::to_string(i) + ".csv")).string());

  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    if (rep.cell(r, "converged") == 0.0) {
      std::fprintf(stderr,
                   "numerical failure: power iteration did not converge at "
                   "report row %zu (field_id %g)\n",
                   r, rep.cell(r, "field_id"));
      return 2;
    }
  }
  std::printf("commutator: %zu rows\n", rep.rows.size());
  return 0;
}

int dispatch(const std::string& sub, const Opts& o) {
  ConfigJson user;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in)
      throw wscat::ConfigError("--config: cannot open '" + o.config_path + "'");
    try {
      user = ConfigJson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw wscat::ConfigError("--config: " + std::string(e.what()));
    }
  }
  ConfigJson resolved = wscat::resolve_config(
      sub, user, o.overrides, o.seed ? &*o.seed : nullptr);
  if (o.dry_run) {
    std::cout << resolved.dump(2) << "\n";
    return 0;
  }

  if (sub == "lp-check") return cmd_lp_check(resolved, o);
  if (sub == "scatter") return cmd_scatter(resolved, o);
  if (sub == "deform") return cmd_deform(resolved, o);
  if (sub == "instability") return cmd_instability(resolved, o);
  if (sub == "stability") return cmd_stability(resolved, o);
  if (sub == "translation") return cmd_translation(resolved, o);
  if (sub == "bandlimited") return cmd_bandlimited(resolved, o);
  if (sub == "decay") return cmd_decay(resolved, o);
  if (sub == "commutator") return cmd_commutator(resolved, o);
  throw wscat::ConfigError("unknown subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytic wavelet scattering: filter banks, transforms, and "
               "deformation experiments"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"lp-check", "build a filter bank and check the frame partition residual"},
      {"scatter", "compute windowed scattering coefficients of a signal"},
      {"deform", "warp a signal and report deformation metrics and distance"},
      {"instability", "oscillatory-pair cascade across dyadic rescalings"},
      {"stability", "distance vs smoothness-functional sweep"},
      {"translation", "scattering distance decay under translation"},
      {"bandlimited", "distance growth across band-limited truncations"},
      {"decay", "layer energy decay and weighted-spectrum embeddings"},
      {"commutator", "wavelet/warp commutator operator norms"},
  };

  std::map<std::string, Opts> opts;
  int rc = 0;
  for (const auto& [name, desc] : subs) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    Opts& o = opts[name];
    o.output_dir = "out/" + name;
    cmd->add_option("--config", o.config_path, "JSON configuration file");
    cmd->add_option("--set", o.overrides,
                    "override a config entry, dotted key=value (repeatable)");
    cmd->add_option("--output", o.output_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--dry-run", o.dry_run,
                  "print the resolved configuration and exit");
    cmd->add_option("--seed", o.seed, "override signal/deformation seeds");
    const std::string sub = name;
    cmd->callback([&rc, &opts, sub]() { rc = dispatch(sub, opts.at(sub)); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const wscat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const wscat::DomainEscape& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const wscat::BandwidthExceeded& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const wscat::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
