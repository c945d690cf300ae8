#pragma once

#include "sivspec/types.hpp"

namespace sivspec {

// Unit conventions used throughout:
//   frequency   GHz (linear frequency, not angular)
//   wavelength  nm (vacuum)
//   time        ns
//   temperature K
// Angular factors of 2*pi appear only inside coherent-dynamics code.
struct PhysicalConstants {
  // Boltzmann constant over Planck constant, GHz per kelvin.
  // kB/h = 1.380649e-23 / 6.62607015e-34 (exact SI definitions).
  Real kb_over_h_ghz_per_k = 20.836619123;

  // Speed of light in nm*GHz, so that freq_ghz = c / wavelength_nm.
  Real c_nm_ghz = 2.99792458e8;
};

inline void validate(const PhysicalConstants& pc) {
  if (!(pc.kb_over_h_ghz_per_k > 20.83 && pc.kb_over_h_ghz_per_k < 20.84))
    throw ConfigError("constants: kb_over_h_ghz_per_k outside [20.83, 20.84]");
  if (!(pc.c_nm_ghz > 2.997e8 && pc.c_nm_ghz < 2.999e8))
    throw ConfigError("constants: c_nm_ghz outside physical range");
}

// Converts between vacuum wavelength (nm) and frequency (GHz).
// The map is an involution: applying it twice returns the input.
inline Real wavelength_frequency_convert(Real value, const PhysicalConstants& pc = {}) {
  if (!(value > 0.0)) throw ConfigError("wavelength_frequency_convert: value must be > 0");
  return pc.c_nm_ghz / value;
}

}  // namespace sivspec
