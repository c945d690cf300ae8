#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sivspec/constants.hpp"
#include "sivspec/ensemble.hpp"
#include "sivspec/holeburn.hpp"
#include "sivspec/lambda_system.hpp"
#include "sivspec/spectrum.hpp"

namespace sivspec {

// Two-level emitter parameters for the correlation scan.
struct G2Config {
  Real gamma_ghz = 0.0995;    // spontaneous decay rate (linear GHz)
  Real pump_rate_ghz = 0.01;  // incoherent repump rate
};

inline void validate(const G2Config& cfg) {
  if (!(cfg.gamma_ghz > 0)) throw ConfigError("g2: gamma_ghz must be > 0");
  if (cfg.pump_rate_ghz < 0) throw ConfigError("g2: pump_rate_ghz must be >= 0");
}

struct ScanConfig {
  ScanGrid grid;
  std::vector<Real> temperatures_k;  // sweep mode
  std::vector<Real> powers;          // hole-burning mode (pump saturation)
  Real tau_start_ns = 0.0;           // correlation mode
  Real tau_stop_ns = 20.0;
};

struct OutputConfig {
  std::string format = "csv";  // csv | json
  std::string dir = ".";       // destination directory; the CLI --out flag wins
  bool plot = false;
};

// Full description of a simulation run, parsed from the sectioned key=value
// config format (see README for the grammar).  The digest identifies the
// parsed content: key order and number formatting do not affect it.
struct RunConfig {
  PhysicalConstants constants;
  EnsembleConfig ensemble;  // isotope list may be empty when unused
  LambdaConfig lambda;
  HoleBurnConfig holeburn;
  G2Config g2;
  ScanConfig scan;
  NoiseModel noise;
  OutputConfig output;
  std::string digest;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

// Low-level view of the same sectioned key=value grammar, as a flat
// "section.key" map.  Used for files that carry fit defaults rather than a
// simulation run; repeatable isotope blocks are rejected.
struct ConfigEntry {
  std::string value;
  std::string where;  // origin:line for error messages
};
std::map<std::string, ConfigEntry> parse_flat_config(const std::string& text,
                                                     const std::string& origin);
std::map<std::string, ConfigEntry> load_flat_config(const std::string& path);

}  // namespace sivspec
