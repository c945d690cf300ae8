#include "sivspec/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "sivspec/lineshapes.hpp"
#include "sivspec/spectrum_io.hpp"

namespace sivspec {

void validate(const EnsembleConfig& cfg) {
  if (cfg.isotopes.empty()) throw ConfigError("ensemble: at least one isotope required");
  Real total = 0;
  for (const auto& iso : cfg.isotopes) {
    validate(iso);
    total += iso.abundance;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw ConfigError("ensemble: isotope abundances must sum to 1");
  if (!(cfg.temperature_k > 0)) throw ConfigError("ensemble: temperature must be > 0");
  if (cfg.gamma_inh_ghz < 0) throw ConfigError("ensemble: gamma_inh must be >= 0");
  if (!(cfg.tau_ns > 0) || !(cfg.tau_upper_ns > 0))
    throw ConfigError("ensemble: lifetimes must be > 0");
  if (!(cfg.detection_efficiency > 0 && cfg.detection_efficiency <= 1))
    throw ConfigError("ensemble: detection_efficiency must be in (0, 1]");
  if (cfg.amplitude_overrides)
    for (Real w : *cfg.amplitude_overrides)
      if (!(w >= 0)) throw ConfigError("ensemble: amplitude overrides must be >= 0");
  validate(cfg.law);
  validate(cfg.constants);
}

Spectrum synthesize_ple(const EnsembleConfig& cfg, const ScanGrid& grid) {
  validate(cfg);
  validate(grid);

  const Real t = cfg.temperature_k;
  const Real gamma_t = homogeneous_width(t, cfg.law);
  const Real shift = line_shift(t, cfg.law);

  Spectrum out;
  out.frequency_ghz = grid.frequencies();
  out.intensity = ArrayX::Zero(grid.points);

  // Accumulation order is fixed (isotope list order, then A..D) so repeated
  // runs are bit-identical.
  bool any_center_inside = false;
  for (const auto& iso : cfg.isotopes) {
    const TransitionTable table = transition_frequencies(iso.fine, iso.zpl_offset_ghz);
    const Real boltzmann = upper_branch_weight(iso.fine.delta_gs_ghz, t, cfg.constants);
    for (std::size_t k = 0; k < table.lines.size(); ++k) {
      const Transition& line = table.lines[k];
      const Real tau = line.to_upper_excited ? cfg.tau_upper_ns : cfg.tau_ns;
      const Real fwhm_l = gamma_t + lifetime_limited_linewidth(tau);
      const Real weight = cfg.amplitude_overrides ? (*cfg.amplitude_overrides)[k]
                                                  : (line.from_upper_ground ? boltzmann : 1.0);
      const Real amp = cfg.detection_efficiency * iso.abundance * weight;
      const Real center = line.freq_ghz - shift;
      if (center >= grid.start_ghz && center <= grid.stop_ghz) any_center_inside = true;
      out.intensity += amp * voigt(out.frequency_ghz, center, fwhm_l, cfg.gamma_inh_ghz);
    }
  }

  out.meta["kind"] = "ple";
  out.meta["temperature_k"] = format_double(t);
  if (!any_center_inside)
    out.meta["warning"] = "no transition centers inside the scan window";
  return out;
}

std::vector<Spectrum> temperature_sweep(const EnsembleConfig& cfg, const ScanGrid& grid,
                                        const std::vector<Real>& temperatures_k) {
  if (temperatures_k.empty()) throw ConfigError("sweep: temperature list is empty");
  std::vector<Spectrum> out;
  out.reserve(temperatures_k.size());
  EnsembleConfig step = cfg;
  for (Real t : temperatures_k) {
    step.temperature_k = t;
    out.push_back(synthesize_ple(step, grid));
  }
  return out;
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

Real seeded_normal(std::uint64_t seed, std::uint64_t index) {
  // Two uniforms from a counter-keyed splitmix64 stream, then Box-Muller.
  const std::uint64_t base = splitmix64(seed ^ splitmix64(index));
  const std::uint64_t bits1 = splitmix64(base);
  const std::uint64_t bits2 = splitmix64(base + 0x632be59bd9b4e019ull);
  const Real u1 = (static_cast<Real>(bits1 >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
  const Real u2 = static_cast<Real>(bits2 >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

Spectrum add_noise(const Spectrum& s, const NoiseModel& noise) {
  validate(s);
  validate(noise);
  if (noise.kind == NoiseModel::Kind::none || noise.scale == 0) return s;
  Spectrum out = s;
  for (Eigen::Index i = 0; i < out.intensity.size(); ++i) {
    // Poisson-like fluctuation: per-bin variance = scale * intensity, drawn
    // from the counter-keyed stream and clamped at zero counts.
    const Real n = seeded_normal(noise.seed, static_cast<std::uint64_t>(i));
    const Real sd = std::sqrt(noise.scale * std::max(out.intensity[i], 0.0));
    out.intensity[i] = std::max(out.intensity[i] + sd * n, 0.0);
  }
  out.meta["noise_seed"] = std::to_string(noise.seed);
  return out;
}

std::vector<Peak> find_peaks(const Spectrum& s, Real min_prominence) {
  validate(s);
  if (min_prominence < 0) throw ConfigError("find_peaks: min_prominence must be >= 0");
  const ArrayX& y = s.intensity;
  const ArrayX& f = s.frequency_ghz;
  const Eigen::Index n = y.size();
  std::vector<Peak> peaks;

  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;

    // Valley floor on each side: the minimum until a strictly higher sample
    // (or the edge) is reached.
    Real left_min = y[i];
    for (Eigen::Index j = i - 1; j >= 0 && y[j] <= y[i]; --j) left_min = std::min(left_min, y[j]);
    Real right_min = y[i];
    for (Eigen::Index j = i + 1; j < n && y[j] <= y[i]; ++j) right_min = std::min(right_min, y[j]);
    const Real prominence = y[i] - std::max(left_min, right_min);
    if (prominence < min_prominence) continue;

    Peak p;
    p.index = i;
    p.height = y[i];
    p.prominence = prominence;

    // Sub-sample position by parabola through the three samples at the top.
    const Real denom = y[i - 1] - 2 * y[i] + y[i + 1];
    Real frac = 0;
    if (denom < 0) frac = 0.5 * (y[i - 1] - y[i + 1]) / denom;
    frac = std::clamp(frac, -0.5, 0.5);
    p.freq_ghz = f[i] + frac * (f[i + 1] - f[i]);

    // Half-height crossings by linear interpolation, walking out from the
    // peak.  Missing a crossing on either side leaves the estimate at 0.
    const Real half = y[i] / 2;
    Real left_x = 0, right_x = 0;
    bool have_left = false, have_right = false;
    for (Eigen::Index j = i; j > 0; --j) {
      if (y[j - 1] <= half && y[j] > half) {
        const Real w = (y[j] - half) / (y[j] - y[j - 1]);
        left_x = f[j] + w * (f[j - 1] - f[j]);
        have_left = true;
        break;
      }
      if (y[j - 1] > y[i]) break;
    }
    for (Eigen::Index j = i; j + 1 < n; ++j) {
      if (y[j + 1] <= half && y[j] > half) {
        const Real w = (y[j] - half) / (y[j] - y[j + 1]);
        right_x = f[j] + w * (f[j + 1] - f[j]);
        have_right = true;
        break;
      }
      if (y[j + 1] > y[i]) break;
    }
    if (have_left && have_right) p.fwhm_estimate = right_x - left_x;

    peaks.push_back(p);
  }
  return peaks;
}

Real integrated_area(const Spectrum& s, Real lo_ghz, Real hi_ghz) {
  validate(s);
  const ArrayX& f = s.frequency_ghz;
  const ArrayX& y = s.intensity;
  const Eigen::Index n = f.size();
  if (!(hi_ghz > lo_ghz)) throw ConfigError("integrated_area: window must have hi > lo");
  if (lo_ghz < f[0] || hi_ghz > f[n - 1])
    throw ConfigError("integrated_area: window extends beyond the frequency axis");

  auto value_at = [&](Real x) {
    const Eigen::Index j = std::upper_bound(f.data(), f.data() + n, x) - f.data();
    const Eigen::Index k = std::clamp<Eigen::Index>(j, 1, n - 1);
    const Real w = (x - f[k - 1]) / (f[k] - f[k - 1]);
    return y[k - 1] + w * (y[k] - y[k - 1]);
  };

  const Real ylo = value_at(lo_ghz);
  const Real yhi = value_at(hi_ghz);

  Eigen::Index first = std::lower_bound(f.data(), f.data() + n, lo_ghz) - f.data();
  Eigen::Index last = std::upper_bound(f.data(), f.data() + n, hi_ghz) - f.data() - 1;

  if (first > last) return 0.5 * (ylo + yhi) * (hi_ghz - lo_ghz);

  Real area = 0.5 * (ylo + y[first]) * (f[first] - lo_ghz);
  for (Eigen::Index i = first; i < last; ++i)
    area += 0.5 * (y[i] + y[i + 1]) * (f[i + 1] - f[i]);
  area += 0.5 * (y[last] + yhi) * (hi_ghz - f[last]);
  return area;
}

}  // namespace sivspec
