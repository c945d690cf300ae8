#pragma once

#include <cmath>

#include "sivspec/constants.hpp"
#include "sivspec/fine_structure.hpp"
#include "sivspec/types.hpp"

namespace sivspec {

// Temperature scaling of the homogeneous linewidth and of the line center.
// Width terms are odd powers (direct, Raman-like and higher phonon orders);
// shift terms are even powers.  Coefficients are in GHz / K^n.  The defaults
// are calibrated to reproduce the measured cubic broadening and quadratic
// shift of the optical lines below ~150 K.
struct BroadeningLaw {
  Real a1 = 0.0;
  Real a3 = 2.4e-4;
  Real a5 = 0.0;
  Real a7 = 0.0;
  Real b2 = 4e-3;
  Real b4 = 6e-8;
};

inline void validate(const BroadeningLaw& law) {
  if (law.a1 < 0 || law.a3 < 0 || law.a5 < 0 || law.a7 < 0)
    throw ConfigError("broadening: width coefficients must be >= 0");
}

// Homogeneous (Lorentzian) FWHM added on top of the lifetime limit at
// temperature T.  Does not include inhomogeneous broadening.
inline Real homogeneous_width(Real t_k, const BroadeningLaw& law) {
  if (!(t_k >= 0)) throw ConfigError("homogeneous_width: temperature must be >= 0");
  validate(law);
  const Real t2 = t_k * t_k;
  return t_k * (law.a1 + t2 * (law.a3 + t2 * (law.a5 + t2 * law.a7)));
}

// Thermal shift of the line center at temperature T.  Positive values mean
// a shift toward lower frequency (the line moves blue upon cooling).
inline Real line_shift(Real t_k, const BroadeningLaw& law) {
  if (!(t_k >= 0)) throw ConfigError("line_shift: temperature must be >= 0");
  const Real t2 = t_k * t_k;
  return t2 * (law.b2 + t2 * law.b4);
}

// Phonon-mediated decoherence rate between orbital branches split by
// delta_ghz, driven by the one-phonon occupation at temperature T:
//   gamma = A * 2 pi * delta^3 / (exp(delta / (kB/h * T)) - 1)   [GHz]
// The rate peaks at delta = 2.8214 * (kB/h) * T.
inline Real phonon_linewidth(Real delta_ghz, Real t_k, Real coupling_a,
                             const PhysicalConstants& pc = {}) {
  if (!(delta_ghz >= 0)) throw ConfigError("phonon_linewidth: delta_ghz must be >= 0");
  if (!(t_k > 0)) throw ConfigError("phonon_linewidth: temperature must be > 0");
  if (!(coupling_a >= 0)) throw ConfigError("phonon_linewidth: coupling must be >= 0");
  if (delta_ghz == 0) return 0.0;
  const Real x = delta_ghz / (pc.kb_over_h_ghz_per_k * t_k);
  return coupling_a * two_pi * delta_ghz * delta_ghz * delta_ghz / std::expm1(x);
}

// Boltzmann occupation of the upper ground branch relative to the lower one.
inline Real upper_branch_weight(Real delta_gs_ghz, Real t_k, const PhysicalConstants& pc = {}) {
  if (!(t_k > 0)) throw ConfigError("upper_branch_weight: temperature must be > 0");
  return std::exp(-delta_gs_ghz / (pc.kb_over_h_ghz_per_k * t_k));
}

}  // namespace sivspec
