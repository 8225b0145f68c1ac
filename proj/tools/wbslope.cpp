// Command-line front end: one subcommand per experiment plus `run` for config
// files and `plot-data` for plot descriptions.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "wbslope/errors.hpp"
#include "wbslope/experiment.hpp"

namespace {

constexpr int kExitModule = 1;
constexpr int kExitUsage = 2;

// Flags become config keys; unset flags fall back to the experiment defaults.
struct Subcommand {
  wbs::ExperimentKind kind;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::string output;
  long long seed = 0;
};

void flag(Subcommand& s, const std::string& name, const std::string& key, const std::string& help) {
  s.app->add_option(name, s.values[key], help);
}

wbs::ExperimentConfig to_config(const Subcommand& s) {
  wbs::KeyValues kv;
  kv["experiment"] = wbs::to_string(s.kind);
  kv["seed"] = std::to_string(s.seed);
  kv["output"] = s.output;
  for (const auto& [k, v] : s.values)
    if (!v.empty()) kv[k] = v;
  return wbs::ExperimentConfig::from_key_values(kv);
}

void report(const wbs::RunManifest& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& o : m.outputs) std::cout << o.path.string() << "  sha256=" << o.sha256 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-SNR wideband slope bounds and delay-alignment experiments"};
  app.set_version_flag("--version", wbs::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "key = value config file")->required();

  std::vector<Subcommand> subs;
  subs.reserve(6);
  auto add = [&](wbs::ExperimentKind kind, const std::string& name, const std::string& help) -> Subcommand& {
    Subcommand& s = subs.emplace_back();
    s.kind = kind;
    s.app = app.add_subcommand(name, help);
    s.output = name + ".csv";
    s.app->add_option("-o,--output", s.output, "CSV path (relative paths honour WBSLOPE_OUTPUT_DIR)")
        ->capture_default_str();
    s.app->add_option("--seed", s.seed, "RNG seed")->capture_default_str();
    return s;
  };

  auto& tus = add(wbs::ExperimentKind::TwoUserSweep, "two-user-sweep", "Symmetric two-user inner/outer slopes over a");
  flag(tus, "--a-min", "a_min", "first cross gain (default 0.05)");
  flag(tus, "--a-max", "a_max", "last cross gain (default 2)");
  flag(tus, "--a-step", "a_step", "grid step (default 0.05)");
  flag(tus, "--constraint", "constraint", "equal_power or equal_rate");

  auto& as = add(wbs::ExperimentKind::AlignSearch, "align-search", "Smallest aligned integer bandwidth");
  flag(as, "--delays", "delays", "file with users and delays");
  flag(as, "--channel", "channel", "channel file (adds leakage)");
  flag(as, "--delta", "delta", "residual tolerance (default 0.2)");
  flag(as, "--b-start", "b_start", "first bandwidth (default 1)");
  flag(as, "--b-max", "b_max", "search cap (default 1e7 * b_start)");
  flag(as, "--leakage-tol", "leakage_tol", "series tolerance (default 1e-9)");

  auto& sw = add(wbs::ExperimentKind::AlignSweep, "align-sweep", "Even-slot scheme over a bandwidth grid");
  flag(sw, "--channel", "channel", "channel file");
  flag(sw, "--b-min", "b_min", "first bandwidth (default 1)");
  flag(sw, "--b-max", "b_max", "last bandwidth (default 100)");
  flag(sw, "--steps", "steps", "grid points (default 200)");
  flag(sw, "--constraint", "constraint", "equal_power or equal_rate");
  flag(sw, "--leakage-tol", "leakage_tol", "series tolerance (default 1e-9)");

  auto& pk = add(wbs::ExperimentKind::AlignPeaks, "align-peaks", "Peak bandwidth sequence and its slope");
  flag(pk, "--channel", "channel", "channel file");
  flag(pk, "--count", "count", "number of peaks (default 5)");
  flag(pk, "--delta", "delta", "residual tolerance (default 0.2)");
  flag(pk, "--delta-decay", "delta_decay", "tolerance factor per peak (default 1)");
  flag(pk, "--b-start", "b_start", "first bandwidth (default 1)");
  flag(pk, "--b-max", "b_max", "search cap (default 1e7 * b_start)");
  flag(pk, "--constraint", "constraint", "equal_power or equal_rate");
  flag(pk, "--leakage-tol", "leakage_tol", "series tolerance (default 1e-9)");

  auto& ko = add(wbs::ExperimentKind::KUserOuter, "kuser-outer", "K-user outer bound for one channel");
  flag(ko, "--channel", "channel", "channel file");
  flag(ko, "--epsilon", "epsilon", "pair band width (default 0.3)");
  flag(ko, "--constraint", "constraint", "equal_power or equal_rate");

  auto& mc = add(wbs::ExperimentKind::PairingMC, "pairing-mc", "Monte Carlo pairing probabilities");
  flag(mc, "--dist", "dist", "exp, rayleigh or const (default exp)");
  flag(mc, "--k-list", "k_list", "comma-separated even K values (default 10,50,200)");
  flag(mc, "--epsilon", "epsilon", "pair band width (default 0.3)");
  flag(mc, "--trials", "trials", "trials per K (default 500)");
  flag(mc, "--threads", "threads", "worker threads, 0 = all cores");

  std::string plot_csv, plot_recipe, plot_out;
  auto* plot_cmd = app.add_subcommand("plot-data", "Plot description from an experiment CSV");
  plot_cmd->add_option("--csv", plot_csv, "input CSV")->required();
  plot_cmd->add_option("--recipe", plot_recipe, "fig2, fig3a or fig3b")->required();
  plot_cmd->add_option("-o,--output", plot_out, "output JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) {
      report(wbs::run(wbs::ExperimentConfig::read(config_path)));
    } else if (*plot_cmd) {
      const auto out = wbs::resolve_output(plot_out);
      wbs::emit_plotdata(plot_csv, wbs::parse_recipe(plot_recipe), out);
      std::cout << out.string() << "\n";
    } else {
      for (const auto& s : subs)
        if (*s.app) report(wbs::run(to_config(s)));
    }
  } catch (const wbs::SchemaError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const wbs::BoundUnavailable& e) {
    std::cerr << "error: " << e.what() << "; Hall violating set (left-half users):";
    for (int v : e.violating_set()) std::cerr << ' ' << v + 1;
    std::cerr << "\n";
    return kExitModule;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  }
  return 0;
}
