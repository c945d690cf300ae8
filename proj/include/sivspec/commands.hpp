#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sivspec/fit.hpp"
#include "sivspec/types.hpp"

namespace sivspec {

inline constexpr const char* tool_name = "sivspec";
inline constexpr const char* tool_version = "1.0.0";

// Process exit codes shared by the CLI and its tests.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;         // config / input schema problems
inline constexpr int exit_numerical = 3;      // solver or evaluation breakdown
inline constexpr int exit_not_converged = 4;  // fit finished without converging

struct SimulateOptions {
  std::string mode;  // ple | sweep | holeburn | cpt | g2
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output.dir from the config
  std::optional<std::string> format;   // csv | json, overrides the config
  bool plot = false;                   // also emit an SVG per data file
  std::optional<std::uint64_t> seed;   // overrides noise.seed
};

// What a simulate run produced.  wall_time_s is reported on stdout but kept
// out of run_report.json so that reruns are byte-identical.
struct RunReport {
  std::string command;
  std::string config_path;
  std::string digest;   // content digest of the parsed config
  std::string version;
  std::string out_dir;  // resolved output directory (flag wins over config)
  std::vector<std::string> outputs;  // file names relative to out_dir
  std::vector<std::string> warnings;
  double wall_time_s = 0;
};

// Runs one simulation mode end to end: load + validate the config, compute,
// write the data files (and SVGs when plotting) plus run_report.json into
// out_dir.  Throws ConfigError / NumericalError; exit-code mapping is the
// caller's job.
RunReport cmd_simulate(const SimulateOptions& opts);

struct FitOptions {
  std::string model;     // voigt | multipeak | bilorentzian | power | tpoly | tshift | phonon
  std::string in_path;   // CSV with x,y[,sigma] columns
  std::string out_path;  // fit result JSON
  std::string config_path;              // optional defaults file
  std::vector<std::string> init;        // name=value
  std::vector<std::string> bounds;      // name=lo:hi
  std::vector<long> exclude;            // phonon: data indices to drop
  std::vector<int> terms;               // tpoly: powers from {1, 3, 5, 7}
  std::optional<int> peaks;             // multipeak: number of peaks
  bool with_offset = false;             // phonon: add a constant background
  std::optional<Real> fix_const;        // tpoly: pin the constant term
  std::optional<Real> temperature_k;    // phonon: sample temperature
};

// Reads the curve, assembles the model spec (defaults file first, then
// command-line overrides), fits, and writes the result JSON to out_path.
// The result is written even when the fit did not converge.
FitResult cmd_fit(const FitOptions& opts);

}  // namespace sivspec
