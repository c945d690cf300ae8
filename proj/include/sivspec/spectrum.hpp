#pragma once

#include <map>
#include <string>

#include "sivspec/types.hpp"

namespace sivspec {

// Uniform frequency grid, endpoints inclusive.
struct ScanGrid {
  Real start_ghz = -500.0;
  Real stop_ghz = 500.0;
  int points = 2001;

  ArrayX frequencies() const {
    return ArrayX::LinSpaced(points, start_ghz, stop_ghz);
  }
  Real spacing() const { return (stop_ghz - start_ghz) / (points - 1); }
};

inline void validate(const ScanGrid& g) {
  if (!(g.points >= 2)) throw ConfigError("scan: points must be >= 2");
  if (!(g.stop_ghz > g.start_ghz)) throw ConfigError("scan: stop must be > start");
}

// A sampled spectrum: strictly increasing frequency axis, nonnegative-size
// intensity array of equal length, plus free-form metadata carried through
// to serialized output.
struct Spectrum {
  ArrayX frequency_ghz;
  ArrayX intensity;
  std::map<std::string, std::string> meta;
};

inline void validate(const Spectrum& s) {
  if (s.frequency_ghz.size() != s.intensity.size())
    throw ConfigError("spectrum: axis and intensity lengths differ");
  if (s.frequency_ghz.size() < 2) throw ConfigError("spectrum: needs at least 2 samples");
  for (Eigen::Index i = 1; i < s.frequency_ghz.size(); ++i)
    if (!(s.frequency_ghz[i] > s.frequency_ghz[i - 1]))
      throw ConfigError("spectrum: frequency axis must be strictly increasing");
  if ((s.intensity < 0).any()) throw ConfigError("spectrum: intensities must be >= 0");
}

}  // namespace sivspec
