#pragma once

#include <cmath>

#include "sivspec/types.hpp"

namespace sivspec {

// Scaled complex error function w(z) = exp(-z^2) erfc(-iz), evaluated for
// arbitrary complex argument.  Relative accuracy is close to machine
// precision over the whole plane; the Voigt profile uses Re w(x + iy) with
// y >= 0.  Throws NumericalError on overflow (|z| beyond representable range).
Complex faddeeva_w(Complex z);

// Unit-peak-height Lorentzian, FWHM parameterization.
template <typename Scalar>
Scalar lorentzian(Scalar nu, Scalar nu0, Scalar fwhm) {
  if (!(fwhm > Scalar(0))) throw ConfigError("lorentzian: fwhm must be > 0");
  const Scalar u = 2 * (nu - nu0) / fwhm;
  return 1 / (1 + u * u);
}

// Unit-peak-height Gaussian, FWHM parameterization.
template <typename Scalar>
Scalar gaussian(Scalar nu, Scalar nu0, Scalar fwhm) {
  if (!(fwhm > Scalar(0))) throw ConfigError("gaussian: fwhm must be > 0");
  const Scalar ln2 = Scalar(0.6931471805599453);
  const Scalar u = (nu - nu0) / fwhm;
  return std::exp(-4 * ln2 * u * u);
}

// Unit-peak-height Voigt profile: Lorentzian of FWHM fwhm_l convolved with
// a Gaussian of FWHM fwhm_g, normalized to 1 at nu0.  Degenerate widths
// dispatch to the exact pure shapes; both zero is a domain error.
inline Real voigt(Real nu, Real nu0, Real fwhm_l, Real fwhm_g) {
  if (fwhm_l < 0 || fwhm_g < 0) throw ConfigError("voigt: widths must be >= 0");
  if (fwhm_g == 0 && fwhm_l == 0) throw ConfigError("voigt: both widths zero");
  if (fwhm_g == 0) return lorentzian(nu, nu0, fwhm_l);
  if (fwhm_l == 0) return gaussian(nu, nu0, fwhm_g);
  const Real sqrt_ln2 = 0.8325546111576977;
  const Real x = 2 * sqrt_ln2 * (nu - nu0) / fwhm_g;
  const Real y = sqrt_ln2 * fwhm_l / fwhm_g;
  const Real peak = faddeeva_w(Complex(0, y)).real();
  return faddeeva_w(Complex(x, y)).real() / peak;
}

// Elementwise overloads over a frequency grid.
inline ArrayX lorentzian(const ArrayX& nu, Real nu0, Real fwhm) {
  if (!(fwhm > 0)) throw ConfigError("lorentzian: fwhm must be > 0");
  const ArrayX u = 2 * (nu - nu0) / fwhm;
  return 1 / (1 + u * u);
}

inline ArrayX gaussian(const ArrayX& nu, Real nu0, Real fwhm) {
  if (!(fwhm > 0)) throw ConfigError("gaussian: fwhm must be > 0");
  const ArrayX u = (nu - nu0) / fwhm;
  return (-4 * 0.6931471805599453 * u * u).exp();
}

inline ArrayX voigt(const ArrayX& nu, Real nu0, Real fwhm_l, Real fwhm_g) {
  ArrayX out(nu.size());
  if (fwhm_g == 0) return lorentzian(nu, nu0, fwhm_l);
  if (fwhm_l == 0) return gaussian(nu, nu0, fwhm_g);
  for (Eigen::Index i = 0; i < nu.size(); ++i) out[i] = voigt(nu[i], nu0, fwhm_l, fwhm_g);
  return out;
}

// Voigt FWHM via the Olivero-Longbothum closed form, accurate to ~0.02%
// over all width ratios and exact in both pure limits.
inline Real voigt_fwhm(Real fwhm_l, Real fwhm_g) {
  if (fwhm_l < 0 || fwhm_g < 0) throw ConfigError("voigt_fwhm: widths must be >= 0");
  if (fwhm_g == 0) return fwhm_l;  // the blend coefficients only cancel to ~3e-6 here
  return 0.5346 * fwhm_l + std::sqrt(0.2166 * fwhm_l * fwhm_l + fwhm_g * fwhm_g);
}

}  // namespace sivspec
