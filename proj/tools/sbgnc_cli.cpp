#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbgnc/harness.hpp"

namespace {

using namespace sbgnc;

RunOptions progress_options(bool quiet, double duration) {
  RunOptions opt;
  if (quiet) return opt;
  opt.progress = [duration, next = 0.0](double t) mutable {
    if (t + 1e-9 >= next || t >= duration) {
      std::fprintf(stderr, "  t = %7.2f h / %.2f h\n", t / 3600.0, duration / 3600.0);
      next += 3600.0;
    }
  };
  return opt;
}

void print_summary(const std::vector<MetricsReport>& reports) {
  for (const auto& r : reports) {
    std::printf("satellite %d: fuel %.6g kg, dR mean %.6g m, dR max %.6g m (t = %.3g h), T_U %.6g N m\n", r.satellite,
                r.fuel_kg, r.dR_mean_m, r.dR_max_m, r.dR_max_time_s / 3600.0, r.torque_mean_nm);
    for (const auto& c : r.coefficients) {
      if (!c.relevant) continue;
      std::printf("  %-4s final error %8.3f %%  convergence %s\n", c.name.c_str(), c.final_error_pct,
                  c.convergence_h ? (std::to_string(*c.convergence_h) + " h").c_str() : "no");
    }
  }
}

std::vector<std::string> split_modes(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string m;
  while (std::getline(ss, m, ',')) {
    if (m != "learning" && m != "nonlearning") throw ConfigError("unknown mode '" + m + "'");
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no modes given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-body guidance, navigation and control simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, modes = "learning,nonlearning", history_dir;
  long long seed = -1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write histories and metrics");
  run->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default $SBGNC_OUT or ./sbgnc_out)");
  run->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
  run->add_flag("--quiet", quiet, "Suppress progress output");

  auto* cmp = app.add_subcommand("compare", "Run the scenario in several modes with identical seeds");
  cmp->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--modes", modes, "Comma-separated modes: learning, nonlearning");
  cmp->add_option("--out", out_dir, "Output directory");
  cmp->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
  cmp->add_flag("--quiet", quiet, "Suppress progress output");

  auto* met = app.add_subcommand("metrics", "Recompute metrics from a run directory");
  met->add_option("history-dir", history_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);

  auto* val = app.add_subcommand("validate", "Parse and validate a scenario");
  val->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (val->parsed()) {
      const Scenario sc = load_scenario(scenario_path);
      std::printf("scenario ok: %zu satellite(s), %.1f h, %zu landmarks, truth gravity degree %d\n",
                  sc.satellites.size(), sc.duration / 3600.0, sc.landmarks.size(), sc.asteroid.gravity.degree());
      return 0;
    }
    if (met->parsed()) {
      const auto reports = metrics_from_directory(history_dir);
      std::cout << metrics_to_json(reports);
      return 0;
    }

    Scenario sc = load_scenario(scenario_path);
    if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
    const std::filesystem::path out = out_dir.empty() ? default_output_dir() : std::filesystem::path(out_dir);

    if (run->parsed()) {
      const RunResult res = run_constellation(sc, progress_options(quiet, sc.duration));
      const auto reports = emit_outputs(sc, res, out);
      print_summary(reports);
      std::printf("outputs written to %s\n", out.string().c_str());
      return 0;
    }

    std::vector<ComparisonReport> all;
    for (const auto& mode : split_modes(modes)) {
      Scenario s = sc;
      s.mode.learning = mode == "learning";
      if (!quiet) std::fprintf(stderr, "mode %s\n", mode.c_str());
      const RunResult res = run_constellation(s, progress_options(quiet, s.duration));
      all.push_back({mode, emit_outputs(s, res, out / mode)});
    }
    std::cout << comparison_to_json(all);
    for (const auto& m : all) {
      for (const auto& r : m.reports) {
        std::printf("%-12s satellite %d: dR mean %.6g m, dR max %.6g m, fuel %.6g kg\n", m.mode.c_str(), r.satellite,
                    r.dR_mean_m, r.dR_max_m, r.fuel_kg);
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
