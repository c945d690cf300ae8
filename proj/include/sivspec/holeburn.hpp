#pragma once

#include <vector>

#include "sivspec/fit.hpp"
#include "sivspec/spectrum.hpp"
#include "sivspec/types.hpp"

namespace sivspec {

// Spectral hole burning within an inhomogeneously broadened line: a fixed
// pump saturates the classes resonant with it while a weak probe is scanned
// across.  Each class responds by incoherent rate-equation saturation; the
// observable is the class-averaged excited-state fraction.
struct HoleBurnConfig {
  Real gamma_hom_ghz = 0.279;  // homogeneous Lorentzian FWHM of one class
  Real gamma_inh_ghz = 10.0;   // Gaussian FWHM of the class-center spread
  Real s_pump = 0.5;           // on-resonance pump saturation parameter
  Real s_probe = 0.02;         // on-resonance probe saturation parameter
  Real nu_pump_ghz = 0.0;      // pump position relative to the line center
  Real quad_rel_tol = 1e-6;    // class-average integration tolerance
};

inline void validate(const HoleBurnConfig& cfg) {
  if (!(cfg.gamma_hom_ghz > 0)) throw ConfigError("holeburn: gamma_hom must be > 0");
  if (cfg.gamma_inh_ghz < 0) throw ConfigError("holeburn: gamma_inh must be >= 0");
  if (cfg.s_pump < 0) throw ConfigError("holeburn: s_pump must be >= 0");
  if (cfg.s_probe < 0) throw ConfigError("holeburn: s_probe must be >= 0");
  if (!(cfg.quad_rel_tol > 0 && cfg.quad_rel_tol <= 1e-2))
    throw ConfigError("holeburn: quad_rel_tol must be in (0, 1e-2]");
}

// Total fluorescence signal versus probe detuning.  The dip sits at the
// pump position; its zero-power full width approaches twice the homogeneous
// linewidth.
Spectrum holeburn_scan(const HoleBurnConfig& cfg, const ArrayX& probe_detunings_ghz);

struct HolePowerPoint {
  Real s_pump = 0;
  Real hole_fwhm_ghz = 0;  // from the two-Lorentzian fit of the scan
  bool fit_ok = true;      // false when the hole fit did not converge
};

// Scans the hole at each pump strength (ascending, positive) and extracts
// the fitted hole width; the probe window covers several power-broadened
// widths and enough of the inhomogeneous profile to pin the background.
// Widths grow with pump power.
std::vector<HolePowerPoint> hole_power_series(const HoleBurnConfig& cfg,
                                              const std::vector<Real>& s_pump_values);

}  // namespace sivspec
