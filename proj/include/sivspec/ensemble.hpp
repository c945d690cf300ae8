#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sivspec/broadening.hpp"
#include "sivspec/constants.hpp"
#include "sivspec/fine_structure.hpp"
#include "sivspec/spectrum.hpp"

namespace sivspec {

// Everything needed to synthesize an ensemble excitation spectrum around the
// zero-phonon line.  Frequencies are detunings from the reference ZPL center
// of the dominant species at zero temperature shift.
struct EnsembleConfig {
  std::vector<IsotopeSpecies> isotopes;
  Real temperature_k = 5.0;
  Real gamma_inh_ghz = 10.0;  // Gaussian inhomogeneous FWHM per transition
  Real tau_ns = 1.6;          // lifetime of the lower excited branch
  Real tau_upper_ns = 0.28;   // lifetime of the upper excited branch
  Real detection_efficiency = 1.0;  // overall intensity scale, in (0, 1]
  // When set, these weights (order A, B, C, D) replace the thermal Boltzmann
  // weighting of the upper-ground-branch lines.
  std::optional<std::array<Real, 4>> amplitude_overrides;
  BroadeningLaw law;
  PhysicalConstants constants;
};

void validate(const EnsembleConfig& cfg);

// Additive synthetic noise with deterministic per-sample seeding: the same
// (seed, sample index) pair always yields the same draw, independent of grid
// evaluation order.
struct NoiseModel {
  enum class Kind { none, shot };
  Kind kind = Kind::none;
  Real scale = 0.0;  // shot: per-bin variance = scale * intensity
  std::uint64_t seed = 0;
};

inline void validate(const NoiseModel& nm) {
  if (nm.scale < 0) throw ConfigError("noise: scale must be >= 0");
}

// One detected peak in a sampled spectrum.  freq_ghz is refined by parabolic
// interpolation through the three samples around the maximum; fwhm_estimate
// comes from linear interpolation of the half-height crossings and is 0 when
// a crossing is not bracketed on both sides.
struct Peak {
  Eigen::Index index = 0;
  Real freq_ghz = 0;
  Real height = 0;
  Real prominence = 0;
  Real fwhm_estimate = 0;
};

// Sum of Voigt lines for all isotopes and all four fine-structure components,
// with Boltzmann weighting of the upper-ground-branch lines and temperature-
// dependent width and center shift.
Spectrum synthesize_ple(const EnsembleConfig& cfg, const ScanGrid& grid);

// One spectrum per requested temperature, same grid, ordered as given.
std::vector<Spectrum> temperature_sweep(const EnsembleConfig& cfg, const ScanGrid& grid,
                                        const std::vector<Real>& temperatures_k);

// Returns a copy of the spectrum with noise applied sample by sample.
Spectrum add_noise(const Spectrum& s, const NoiseModel& noise);

// Local maxima with prominence >= min_prominence, in increasing frequency
// order.  Prominence is measured against the higher of the two flanking
// valleys, valleys ending at the array edges or at the nearest higher sample.
std::vector<Peak> find_peaks(const Spectrum& s, Real min_prominence);

// Trapezoidal integral of intensity over [lo_ghz, hi_ghz], with linear
// interpolation at the window edges.  The window must lie inside the axis.
Real integrated_area(const Spectrum& s, Real lo_ghz, Real hi_ghz);

// Standard normal draw keyed by (seed, index); splitmix64-based, stable
// across platforms.
Real seeded_normal(std::uint64_t seed, std::uint64_t index);

}  // namespace sivspec
