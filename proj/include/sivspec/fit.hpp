#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sivspec/spectrum.hpp"
#include "sivspec/types.hpp"

namespace sivspec {

// (x, y) samples with optional per-point standard deviations.  When sigma
// is empty all points carry unit weight and parameter uncertainties are
// scaled by the reduced chi-square; when sigma is given it is taken as
// absolute and no rescaling is applied.
struct CurveData {
  ArrayX x;
  ArrayX y;
  ArrayX sigma;
};

inline void validate(const CurveData& d) {
  if (d.x.size() != d.y.size()) throw ConfigError("curve data: x and y lengths differ");
  if (d.x.size() < 1) throw ConfigError("curve data: empty");
  if (d.sigma.size() != 0) {
    if (d.sigma.size() != d.x.size()) throw ConfigError("curve data: sigma length mismatch");
    if ((d.sigma <= 0).any()) throw ConfigError("curve data: sigma values must be > 0");
  }
}

struct FitParam {
  Real value = 0;
  Real sigma = 0;
  std::string unit;
};

struct IterationRecord {
  int iteration = 0;
  Real cost = 0;       // sum of squared (weighted) residuals after the step
  Real lambda = 0;     // damping in effect when the step was accepted
  Real step_norm = 0;  // Euclidean norm of the accepted parameter step
};

struct FitResult {
  std::string model;
  std::vector<std::pair<std::string, FitParam>> params;  // declaration order
  Real chi2_per_dof = 0;
  bool converged = false;
  int iterations = 0;
  Real residual_norm = 0;
  std::vector<std::string> flags;
  std::vector<IterationRecord> log;  // accepted steps only, cost non-increasing
  MatrixX covariance;                // free parameters, declaration order

  const FitParam& at(const std::string& name) const {
    for (const auto& [n, p] : params)
      if (n == name) return p;
    throw ConfigError("fit result: no parameter named '" + name + "'");
  }
  Real value(const std::string& name) const { return at(name).value; }
  Real sigma(const std::string& name) const { return at(name).sigma; }
  bool has_flag(const std::string& f) const {
    for (const auto& g : flags)
      if (g == f) return true;
    return false;
  }
};

struct LMOptions {
  int max_iterations = 500;
  Real step_tol = 1e-8;   // relative parameter step below which a fit is done
  Real cost_tol = 1e-10;  // relative cost decrease below which a fit is done
  Real lambda_init_scale = 1e-3;
};

// A curve model: given the abscissa grid and a parameter vector, produce
// model values.  Parameter names/units label the FitResult.
struct CurveModel {
  std::string name;
  std::function<ArrayX(const ArrayX&, const VectorX&)> eval;
  std::vector<std::string> param_names;
  std::vector<std::string> param_units;
  VectorX init;
  VectorX lower;
  VectorX upper;
};

// Damped Gauss-Newton (Levenberg-Marquardt) least squares with box bounds:
// central-difference Jacobian, multiplicative damping schedule, covariance
// from the normal equations at the solution.
FitResult levenberg_marquardt(const CurveModel& model, const CurveData& data,
                              const LMOptions& opts = {});

enum class ModelKind {
  voigt,
  multi_voigt,
  bilorentzian,
  power_broadening,
  t_poly,
  t_shift,
  phonon_strain
};

// Declarative fit request: which model, its structural options, optional
// initial values / box bounds by parameter name, and values held fixed.
// Anything not supplied is derived from the data.  A parameter may not be
// both fixed and bounded.
struct ModelSpec {
  ModelKind kind = ModelKind::voigt;
  int n_peaks = 2;                     // multi_voigt only
  std::vector<int> terms = {3, 5, 7};  // t_poly: subset of {1, 3, 5, 7}
  std::vector<Eigen::Index> exclude;   // phonon_strain: data indices left out
  bool with_offset = false;            // phonon_strain: add a constant background
  std::map<std::string, Real> fixed_params;  // t_poly: "const"; phonon_strain: "temperature_k"
  std::map<std::string, Real> init;
  std::map<std::string, std::pair<Real, Real>> bounds;
};

FitResult least_squares(const ModelSpec& spec, const CurveData& data,
                        const LMOptions& opts = {});
FitResult least_squares(const ModelSpec& spec, const Spectrum& s, const LMOptions& opts = {});

// Single Voigt peak on a constant offset.  Parameters: center, fwhm_l,
// fwhm_g, amplitude, offset; plus the derived total width "fwhm"
// (Olivero-Longbothum of the fitted widths, sigma by error propagation).
FitResult fit_voigt(const CurveData& data, const std::map<std::string, Real>& init = {});

// Sum of n Voigt peaks sharing one offset.  Parameters per peak k (1-based):
// center_k, fwhm_l_k, fwhm_g_k, amplitude_k; plus offset.
FitResult fit_multi_voigt(const CurveData& data, int n_peaks,
                          const std::map<std::string, Real>& init = {});

// Broad background Lorentzian minus a narrow hole Lorentzian plus offset.
// Parameters: bg_center, bg_fwhm, bg_amplitude, hole_center, hole_fwhm,
// hole_amplitude, offset; plus the derived "hole_fwhm_half" so both width
// conventions are reported.  Sets flag "no_hole" when the fitted hole is
// insignificant.
FitResult fit_bilorentzian(const CurveData& data, const std::map<std::string, Real>& init = {});

// Saturation-broadening extrapolation of a width-versus-power series:
// fwhm(P) = gamma0 * sqrt(1 + P / p_sat).  Falls back to a straight line
// gamma0 + slope * P (flag "linear_fallback") when the curvature is not
// resolvable, and flags "non_monotone" when the series decreases beyond the
// fit residual scale.
FitResult extrapolate_zero_power(const CurveData& series);

// Linewidth versus temperature: const + sum of a_k T^k over the requested
// odd powers k in {1, 3, 5, 7}.  Coefficients are bounded below by zero;
// the constant can be pinned.
FitResult fit_temperature_linewidth(const CurveData& data, const std::vector<int>& terms,
                                    bool fix_const = false, Real const_value = 0);

// Line-center shift versus temperature: b2 T^2 + b4 T^4 with free signs.
FitResult fit_temperature_shift(const CurveData& data);

// Orbital decoherence rate versus branch splitting at fixed temperature:
// gamma(delta) = a * 2 pi * delta^3 / (exp(delta / (kB/h T)) - 1) [+ offset].
FitResult fit_phonon_model(const CurveData& data, Real temperature_k, bool with_offset = false,
                           const std::vector<Eigen::Index>& exclude = {});

}  // namespace sivspec
