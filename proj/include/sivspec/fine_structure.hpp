#pragma once

#include <array>
#include <cmath>
#include <string>

#include "sivspec/types.hpp"

namespace sivspec {

inline constexpr Real two_pi = 6.283185307179586;

// Ground- and excited-state doublet splittings of the SiV zero-phonon line.
struct FineStructure {
  Real delta_gs_ghz = 48.1;   // ground-state splitting
  Real delta_es_ghz = 256.6;  // excited-state splitting
};

inline void validate(const FineStructure& fs) {
  if (!(fs.delta_gs_ghz > 0)) throw ConfigError("fine_structure: delta_gs_ghz must be > 0");
  if (!(fs.delta_es_ghz > 0)) throw ConfigError("fine_structure: delta_es_ghz must be > 0");
}

// One silicon isotope contributing to the ensemble line pattern.
struct IsotopeSpecies {
  std::string label = "Si28";
  Real abundance = 1.0;       // fractional, the set carried by a config sums to ~1
  Real zpl_offset_ghz = 0.0;  // isotope shift of the zero-phonon-line center
  FineStructure fine;
};

inline void validate(const IsotopeSpecies& iso) {
  if (iso.label.empty()) throw ConfigError("isotope: label must be non-empty");
  if (!(iso.abundance > 0 && iso.abundance <= 1))
    throw ConfigError("isotope '" + iso.label + "': abundance must be in (0, 1]");
  validate(iso.fine);
}

// The four optical transitions of the double-doublet level scheme, ordered
// by decreasing frequency: A and B end on the upper excited branch, B and D
// start from the upper ground branch.
struct Transition {
  char label;
  Real freq_ghz;
  bool from_upper_ground;
  bool to_upper_excited;
};

struct TransitionTable {
  std::array<Transition, 4> lines;
  Real a() const { return lines[0].freq_ghz; }
  Real b() const { return lines[1].freq_ghz; }
  Real c() const { return lines[2].freq_ghz; }
  Real d() const { return lines[3].freq_ghz; }
};

inline TransitionTable transition_frequencies(const FineStructure& fs, Real center_ghz = 0.0) {
  validate(fs);
  const Real sum_half = (fs.delta_es_ghz + fs.delta_gs_ghz) / 2;
  const Real diff_half = (fs.delta_es_ghz - fs.delta_gs_ghz) / 2;
  return {{{{'A', center_ghz + sum_half, false, true},
            {'B', center_ghz + diff_half, true, true},
            {'C', center_ghz - diff_half, false, false},
            {'D', center_ghz - sum_half, true, false}}}};
}

// Fourier-limited FWHM of a transition with excited-state lifetime tau (ns),
// in GHz: 1 / (2 pi tau).
inline Real lifetime_limited_linewidth(Real tau_ns) {
  if (!(tau_ns > 0)) throw ConfigError("lifetime_limited_linewidth: tau_ns must be > 0");
  return 1.0 / (two_pi * tau_ns);
}

}  // namespace sivspec
