#pragma once

#include <cmath>
#include <vector>

#include "sivspec/spectrum.hpp"
#include "sivspec/types.hpp"

namespace sivspec {

// Density matrix over the basis {g1, g2, e}.
using DensityMatrix3 = Matrix3c;

// Checks Hermiticity, unit trace and population bounds at 1e-10 tolerance.
void validate_density_matrix(const DensityMatrix3& rho);

// Dark-resonance configuration: the two ground states are coupled to one
// excited state by a pump (g1-e) and a probe (g2-e) field.  All rates and
// Rabi frequencies are linear-frequency GHz; factors of 2 pi are applied
// inside the generator.  Detunings are per-transition, so the ground
// splitting delta_gs does not enter the rotating-frame dynamics; it is
// carried for bookkeeping (laser frequency reconstruction).
struct LambdaConfig {
  Real gamma_e_ghz = 0.1;        // total excited-state decay (natural FWHM)
  Real branching = 0.5;          // fraction of decay into g1, in (0, 1)
  Real gamma_gs_ghz = 0.0;       // ground-doublet coherence decay (FWHM-style)
  Real delta_gs_ghz = 48.1;      // ground-doublet splitting
  Real omega_pump_ghz = 0.02;    // pump Rabi frequency
  Real omega_probe_ghz = 0.02;   // probe Rabi frequency
  Real detuning_pump_ghz = 0.0;  // pump one-photon detuning
  Real detuning_probe_ghz = 0.0; // probe one-photon detuning
};

inline void validate(const LambdaConfig& cfg) {
  if (!(cfg.gamma_e_ghz > 0)) throw ConfigError("lambda: gamma_e must be > 0");
  if (!(cfg.branching > 0 && cfg.branching < 1))
    throw ConfigError("lambda: branching must be in (0, 1)");
  if (cfg.gamma_gs_ghz < 0) throw ConfigError("lambda: gamma_gs must be >= 0");
  if (cfg.delta_gs_ghz < 0) throw ConfigError("lambda: delta_gs must be >= 0");
  if (cfg.omega_pump_ghz < 0 || cfg.omega_probe_ghz < 0)
    throw ConfigError("lambda: Rabi frequencies must be >= 0");
}

struct SteadyState {
  DensityMatrix3 rho;
  Real residual;  // scaled norm of the generator applied to the solution
};

// Unique stationary density matrix of the driven, damped three-level system,
// found by solving the vectorized generator with the trace condition in
// place of one redundant population row.  With both drives off the ground
// populations are individually conserved; the equal ground mixture is
// returned in that case.  Throws NumericalError if the stationary state is
// not unique (singular generator beyond the trace degeneracy).
SteadyState steady_state_lambda(const LambdaConfig& cfg);

// Excited-state population versus probe detuning (the configured
// detuning_probe is ignored in favor of the scan values).  Fluorescence is
// proportional to this; the dark resonance appears where the two-photon
// detuning vanishes.
Spectrum cpt_scan(const LambdaConfig& cfg, const ArrayX& probe_detunings_ghz);

// Normalized intensity autocorrelation of a two-level emitter with decay
// rate gamma_ghz and pump rate w_ghz (both linear GHz):
//   g2(tau) = 1 - exp(-2 pi (gamma + w) tau)
inline Real g2_two_level(Real tau_ns, Real gamma_ghz, Real w_ghz) {
  if (!(gamma_ghz > 0)) throw ConfigError("g2_two_level: gamma must be > 0");
  if (w_ghz < 0) throw ConfigError("g2_two_level: pump rate must be >= 0");
  if (tau_ns < 0) throw ConfigError("g2_two_level: tau must be >= 0");
  return 1.0 - std::exp(-6.283185307179586 * (gamma_ghz + w_ghz) * tau_ns);
}

inline std::vector<Real> g2_two_level(const std::vector<Real>& tau_ns, Real gamma_ghz,
                                      Real w_ghz) {
  std::vector<Real> out;
  out.reserve(tau_ns.size());
  for (Real t : tau_ns) out.push_back(g2_two_level(t, gamma_ghz, w_ghz));
  return out;
}

}  // namespace sivspec
