#include <cstdio>

#include <CLI11.hpp>

#include "sivspec/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation and fitting toolkit for low-temperature emitter spectroscopy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sivspec::tool_version);

  sivspec::SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Synthesize spectra and scans");
  simulate->add_option("mode", sim.mode, "ple | sweep | holeburn | cpt | g2")->required();
  simulate->add_option("--config", sim.config_path, "Run configuration file")->required();
  std::string sim_out;
  CLI::Option* out_opt =
      simulate->add_option("--out", sim_out, "Output directory (overrides the config)");
  std::string sim_format;
  simulate->add_option("--format", sim_format, "csv | json (overrides the config)");
  simulate->add_flag("--plot", sim.plot, "Also write an SVG per data file");
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = simulate->add_option("--seed", seed, "Override the noise seed");

  sivspec::FitOptions fit;
  CLI::App* fitcmd = app.add_subcommand("fit", "Fit a model to tabulated data");
  fitcmd
      ->add_option("model", fit.model,
                   "voigt | multipeak | bilorentzian | power | tpoly | tshift | phonon")
      ->required();
  fitcmd->add_option("--in", fit.in_path, "Input CSV with x,y[,sigma] columns")->required();
  fitcmd->add_option("--out", fit.out_path, "Output JSON path")->required();
  fitcmd->add_option("--config", fit.config_path, "Defaults file for this fit");
  fitcmd->add_option("--init", fit.init, "Initial value as name=value (repeatable)");
  fitcmd->add_option("--bound", fit.bounds, "Box bound as name=lo:hi (repeatable)");
  fitcmd->add_option("--exclude", fit.exclude, "Data index to leave out (repeatable)");
  fitcmd->add_option("--terms", fit.terms, "tpoly: powers from {1, 3, 5, 7} (repeatable)");
  int peaks = 0;
  CLI::Option* peaks_opt = fitcmd->add_option("--peaks", peaks, "multipeak: number of peaks");
  fitcmd->add_flag("--with-offset", fit.with_offset, "phonon: fit a constant background");
  double fix_const = 0;
  CLI::Option* const_opt =
      fitcmd->add_option("--fix-const", fix_const, "tpoly: pin the constant term");
  double temperature = 0;
  CLI::Option* temp_opt =
      fitcmd->add_option("--temperature", temperature, "phonon: sample temperature in K");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sivspec::exit_ok : sivspec::exit_config;
  }

  try {
    if (*simulate) {
      if (*out_opt) sim.out_dir = sim_out;
      if (!sim_format.empty()) sim.format = sim_format;
      if (*seed_opt) sim.seed = seed;
      const sivspec::RunReport report = sivspec::cmd_simulate(sim);
      for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("%s: wrote %zu file(s) to %s in %.3f s (config digest %s)\n",
                  report.command.c_str(), report.outputs.size(), report.out_dir.c_str(),
                  report.wall_time_s, report.digest.c_str());
      return sivspec::exit_ok;
    }
    if (*peaks_opt) fit.peaks = peaks;
    if (*const_opt) fit.fix_const = fix_const;
    if (*temp_opt) fit.temperature_k = temperature;
    const sivspec::FitResult result = sivspec::cmd_fit(fit);
    std::printf("fit %s: %s, chi2/dof %.6g, %d iteration(s), result written to %s\n",
                fit.model.c_str(), result.converged ? "converged" : "did not converge",
                result.chi2_per_dof, result.iterations, fit.out_path.c_str());
    return result.converged ? sivspec::exit_ok : sivspec::exit_not_converged;
  } catch (const sivspec::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return sivspec::exit_config;
  } catch (const sivspec::NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return sivspec::exit_numerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return sivspec::exit_numerical;
  }
}
