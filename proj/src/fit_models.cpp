#include <algorithm>
#include <cmath>
#include <limits>

#include "sivspec/broadening.hpp"
#include "sivspec/fit.hpp"
#include "sivspec/lineshapes.hpp"

namespace sivspec {

namespace {

constexpr Real inf = std::numeric_limits<Real>::infinity();

Real pick(const std::map<std::string, Real>& init, const std::string& name, Real fallback) {
  auto it = init.find(name);
  return it == init.end() ? fallback : it->second;
}

void check_fixed(const ModelSpec& spec) {
  for (const auto& [name, value] : spec.fixed_params) {
    (void)value;
    const bool ok = (spec.kind == ModelKind::t_poly && name == "const") ||
                    (spec.kind == ModelKind::phonon_strain && name == "temperature_k");
    if (!ok) throw ConfigError("fit: parameter '" + name + "' cannot be fixed for this model");
    if (spec.bounds.count(name))
      throw ConfigError("fit: parameter '" + name + "' is both fixed and bounded");
  }
}

void apply_bounds(CurveModel& model, const ModelSpec& spec) {
  for (const auto& [name, lohi] : spec.bounds) {
    auto it = std::find(model.param_names.begin(), model.param_names.end(), name);
    if (it == model.param_names.end())
      throw ConfigError("fit: bound given for unknown parameter '" + name + "'");
    const Eigen::Index j = it - model.param_names.begin();
    model.lower[j] = lohi.first;
    model.upper[j] = lohi.second;
  }
}

void append_param(FitResult& r, const std::string& name, Real value, Real sigma,
                  const std::string& unit) {
  FitParam fp;
  fp.value = value;
  fp.sigma = sigma;
  fp.unit = unit;
  r.params.emplace_back(name, fp);
}

// Peak-shape evaluation tolerant of a width pinned at its zero bound.
ArrayX safe_voigt(const ArrayX& x, Real center, Real fl, Real fg) {
  fl = std::max(fl, 0.0);
  fg = std::max(fg, 0.0);
  if (fl == 0 && fg == 0) fl = 1e-12;
  return voigt(x, center, fl, fg);
}

ArrayX safe_lorentzian(const ArrayX& x, Real center, Real fwhm) {
  return lorentzian(x, center, std::max(fwhm, 1e-12));
}

struct PeakGuess {
  Real center, height, offset, width;
};

// Coarse single-peak start: maximum sample, base level, half-height span.
PeakGuess guess_peak(const CurveData& d) {
  Eigen::Index imax = 0;
  d.y.maxCoeff(&imax);
  PeakGuess g;
  g.offset = d.y.minCoeff();
  g.height = d.y[imax] - g.offset;
  g.center = d.x[imax];
  const Real half = g.offset + g.height / 2;
  Real lo = d.x[0], hi = d.x[d.x.size() - 1];
  for (Eigen::Index i = imax; i >= 0; --i)
    if (d.y[i] < half) {
      lo = d.x[i];
      break;
    }
  for (Eigen::Index i = imax; i < d.x.size(); ++i)
    if (d.y[i] < half) {
      hi = d.x[i];
      break;
    }
  g.width = std::max(hi - lo, 4 * (d.x[1] - d.x[0]));
  return g;
}

CurveModel make_voigt_model(const CurveData& d, const ModelSpec& spec) {
  const PeakGuess g = guess_peak(d);
  const Real span = d.x[d.x.size() - 1] - d.x[0];
  CurveModel m;
  m.name = "voigt";
  m.param_names = {"center", "fwhm_l", "fwhm_g", "amplitude", "offset"};
  m.param_units = {"GHz", "GHz", "GHz", "arb", "arb"};
  m.init.resize(5);
  m.init << pick(spec.init, "center", g.center), pick(spec.init, "fwhm_l", 0.3 * g.width),
      pick(spec.init, "fwhm_g", 0.7 * g.width), pick(spec.init, "amplitude", g.height),
      pick(spec.init, "offset", g.offset);
  m.lower.resize(5);
  m.lower << d.x[0] - span, 0, 0, 0, -inf;
  m.upper.resize(5);
  m.upper << d.x[d.x.size() - 1] + span, 20 * span, 20 * span, inf, inf;
  m.eval = [](const ArrayX& x, const VectorX& p) -> ArrayX {
    return p[3] * safe_voigt(x, p[0], p[1], p[2]) + p[4];
  };
  return m;
}

CurveModel make_multi_voigt_model(const CurveData& d, const ModelSpec& spec) {
  const int k = spec.n_peaks;
  if (k < 1) throw ConfigError("fit: multi_voigt needs n_peaks >= 1");
  const Real span = d.x[d.x.size() - 1] - d.x[0];
  const PeakGuess g = guess_peak(d);

  CurveModel m;
  m.name = "multi_voigt";
  m.init.resize(4 * k + 1);
  m.lower.resize(4 * k + 1);
  m.upper.resize(4 * k + 1);
  for (int i = 0; i < k; ++i) {
    const std::string sfx = "_" + std::to_string(i + 1);
    m.param_names.insert(m.param_names.end(),
                         {"center" + sfx, "fwhm_l" + sfx, "fwhm_g" + sfx, "amplitude" + sfx});
    m.param_units.insert(m.param_units.end(), {"GHz", "GHz", "GHz", "arb"});
    // Default initial centers spread evenly across the scan.
    const Real c0 = d.x[0] + span * (i + 1.0) / (k + 1.0);
    m.init[4 * i + 0] = pick(spec.init, "center" + sfx, c0);
    m.init[4 * i + 1] = pick(spec.init, "fwhm_l" + sfx, 0.3 * g.width);
    m.init[4 * i + 2] = pick(spec.init, "fwhm_g" + sfx, 0.7 * g.width);
    m.init[4 * i + 3] = pick(spec.init, "amplitude" + sfx, g.height);
    m.lower.segment(4 * i, 4) << d.x[0] - span, 0, 0, 0;
    m.upper.segment(4 * i, 4) << d.x[d.x.size() - 1] + span, 20 * span, 20 * span, inf;
  }
  m.param_names.push_back("offset");
  m.param_units.push_back("arb");
  m.init[4 * k] = pick(spec.init, "offset", g.offset);
  m.lower[4 * k] = -inf;
  m.upper[4 * k] = inf;
  m.eval = [k](const ArrayX& x, const VectorX& p) -> ArrayX {
    ArrayX y = ArrayX::Constant(x.size(), p[4 * k]);
    for (int i = 0; i < k; ++i)
      y += p[4 * i + 3] * safe_voigt(x, p[4 * i + 0], p[4 * i + 1], p[4 * i + 2]);
    return y;
  };
  return m;
}

CurveModel make_bilorentzian_model(const CurveData& d, const ModelSpec& spec) {
  const Real span = d.x[d.x.size() - 1] - d.x[0];
  const Real mid = 0.5 * (d.x[0] + d.x[d.x.size() - 1]);
  Eigen::Index imin = 0;
  d.y.minCoeff(&imin);
  const Real ymax = d.y.maxCoeff();

  CurveModel m;
  m.name = "bilorentzian";
  m.param_names = {"bg_center", "bg_fwhm",   "bg_amplitude", "hole_center",
                   "hole_fwhm", "hole_amplitude", "offset"};
  m.param_units = {"GHz", "GHz", "arb", "GHz", "GHz", "arb", "arb"};
  m.init.resize(7);
  m.init << pick(spec.init, "bg_center", mid), pick(spec.init, "bg_fwhm", 2 * span),
      pick(spec.init, "bg_amplitude", ymax), pick(spec.init, "hole_center", d.x[imin]),
      pick(spec.init, "hole_fwhm", span / 20), pick(spec.init, "hole_amplitude", 0.1 * ymax),
      pick(spec.init, "offset", 0.0);
  m.lower.resize(7);
  m.lower << d.x[0] - 2 * span, span / 50, 0, d.x[0], span / 1e4, 0, -inf;
  m.upper.resize(7);
  m.upper << d.x[d.x.size() - 1] + 2 * span, 1e4 * span, inf, d.x[d.x.size() - 1], 2 * span, inf,
      inf;
  m.eval = [](const ArrayX& x, const VectorX& p) -> ArrayX {
    return p[2] * safe_lorentzian(x, p[0], p[1]) - p[5] * safe_lorentzian(x, p[3], p[4]) + p[6];
  };
  return m;
}

CurveModel make_power_model(const CurveData& d, const ModelSpec& spec) {
  if (d.x.size() < 3) throw ConfigError("fit: power_broadening needs at least 3 points");
  for (Eigen::Index i = 0; i < d.x.size(); ++i)
    if (!(d.x[i] >= 0)) throw ConfigError("fit: power values must be >= 0");
  const Real pmax = std::max(d.x.maxCoeff(), 1e-12);

  // Two-point curvature estimate for the saturation-power start.
  const Real y0 = std::max(d.y[0], 1e-12);
  const Real ratio2 = (d.y[d.y.size() - 1] / y0) * (d.y[d.y.size() - 1] / y0);
  Real p_sat_seed = pmax;
  if (ratio2 > 1 + 1e-9) p_sat_seed = std::clamp(pmax / (ratio2 - 1), 1e-12, 1e6 * pmax);

  CurveModel m;
  m.name = "power_broadening";
  m.param_names = {"gamma0", "p_sat"};
  m.param_units = {"GHz", "arb"};
  m.init.resize(2);
  m.init << pick(spec.init, "gamma0", d.y.minCoeff()), pick(spec.init, "p_sat", p_sat_seed);
  m.lower.resize(2);
  m.lower << 0, 1e-12;
  m.upper.resize(2);
  m.upper << inf, 1e9 * pmax;
  m.eval = [](const ArrayX& x, const VectorX& p) -> ArrayX {
    return p[0] * (1 + x / std::max(p[1], 1e-300)).sqrt();
  };
  return m;
}

// Ordinary linear least squares, used both to seed the polynomial models
// with their exact optimum and as the straight-line fallback.
VectorX linear_solve(const MatrixX& design, const ArrayX& y) {
  return design.colPivHouseholderQr().solve(y.matrix());
}

CurveModel make_tpoly_model(const CurveData& d, const ModelSpec& spec) {
  std::vector<int> terms = spec.terms;
  if (terms.empty()) throw ConfigError("fit: t_poly needs at least one power term");
  for (int k : terms)
    if (k != 1 && k != 3 && k != 5 && k != 7)
      throw ConfigError("fit: t_poly powers must come from {1, 3, 5, 7}");
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const auto fixed = spec.fixed_params.find("const");
  const bool fixc = fixed != spec.fixed_params.end();
  const Real c0 = fixc ? fixed->second : 0.0;
  const int nt = static_cast<int>(terms.size());
  const int np = nt + (fixc ? 0 : 1);

  // Seed from the linear normal equations, clamped into the bound box.
  MatrixX design(d.x.size(), np);
  int col = 0;
  if (!fixc) design.col(col++).setOnes();
  for (int k : terms) design.col(col++) = d.x.pow(k).matrix();
  ArrayX target = d.y;
  if (fixc) target -= c0;
  VectorX seed = linear_solve(design, target);

  CurveModel m;
  m.name = "t_poly";
  m.init.resize(np);
  m.lower = VectorX::Zero(np);
  m.upper = VectorX::Constant(np, inf);
  col = 0;
  if (!fixc) {
    m.param_names.push_back("const");
    m.param_units.push_back("GHz");
    m.init[col] = pick(spec.init, "const", std::max(seed[col], 0.0));
    ++col;
  }
  for (int k : terms) {
    m.param_names.push_back("a" + std::to_string(k));
    m.param_units.push_back("GHz/K^" + std::to_string(k));
    m.init[col] = pick(spec.init, "a" + std::to_string(k), std::max(seed[col], 0.0));
    ++col;
  }
  m.eval = [terms, fixc, c0](const ArrayX& x, const VectorX& p) -> ArrayX {
    int idx = 0;
    ArrayX y = ArrayX::Constant(x.size(), fixc ? c0 : p[idx++]);
    for (int k : terms) y += p[idx++] * x.pow(k);
    return y;
  };
  return m;
}

CurveModel make_tshift_model(const CurveData& d, const ModelSpec& spec) {
  MatrixX design(d.x.size(), 2);
  design.col(0) = d.x.pow(2).matrix();
  design.col(1) = d.x.pow(4).matrix();
  const VectorX seed = linear_solve(design, d.y);

  CurveModel m;
  m.name = "t_shift";
  m.param_names = {"b2", "b4"};
  m.param_units = {"GHz/K^2", "GHz/K^4"};
  m.init.resize(2);
  m.init << pick(spec.init, "b2", seed[0]), pick(spec.init, "b4", seed[1]);
  m.eval = [](const ArrayX& x, const VectorX& p) -> ArrayX {
    return p[0] * x.pow(2) + p[1] * x.pow(4);
  };
  return m;
}

CurveModel make_phonon_model(const CurveData& d, const ModelSpec& spec) {
  const auto t_it = spec.fixed_params.find("temperature_k");
  if (t_it == spec.fixed_params.end())
    throw ConfigError("fit: phonon_strain needs a fixed temperature_k");
  const Real temperature = t_it->second;
  if (!(temperature > 0)) throw ConfigError("fit: phonon_strain needs temperature_k > 0");
  const Real kt = PhysicalConstants{}.kb_over_h_ghz_per_k * temperature;
  if (d.x.size() < (spec.with_offset ? 2 : 1))
    throw ConfigError("fit: phonon_strain with offset needs at least 2 points");
  ArrayX shape(d.x.size());
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    if (!(d.x[i] > 0)) throw ConfigError("fit: phonon_strain needs positive splittings");
    shape[i] = two_pi * d.x[i] * d.x[i] * d.x[i] / std::expm1(d.x[i] / kt);
  }

  const bool off = spec.with_offset;
  MatrixX design(d.x.size(), off ? 2 : 1);
  design.col(0) = shape.matrix();
  if (off) design.col(1).setOnes();
  const VectorX seed = linear_solve(design, d.y);

  CurveModel m;
  m.name = "phonon_strain";
  m.param_names = {"a"};
  m.param_units = {"GHz^-2"};
  m.init.resize(off ? 2 : 1);
  m.init[0] = pick(spec.init, "a", std::max(seed[0], 0.0));
  m.lower = VectorX::Zero(off ? 2 : 1);
  m.upper = VectorX::Constant(off ? 2 : 1, inf);
  if (off) {
    m.param_names.push_back("offset");
    m.param_units.push_back("GHz");
    m.init[1] = pick(spec.init, "offset", seed[1]);
    m.lower[1] = -inf;
  }
  m.eval = [kt, off](const ArrayX& x, const VectorX& p) -> ArrayX {
    ArrayX y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      y[i] = p[0] * two_pi * x[i] * x[i] * x[i] / std::expm1(x[i] / kt);
    if (off) y += p[1];
    return y;
  };
  return m;
}

CurveData drop_indices(const CurveData& d, const std::vector<Eigen::Index>& exclude) {
  if (exclude.empty()) return d;
  std::vector<bool> keep(d.x.size(), true);
  for (Eigen::Index idx : exclude) {
    if (idx < 0 || idx >= d.x.size())
      throw ConfigError("fit: exclusion index out of range");
    keep[idx] = false;
  }
  const Eigen::Index n = std::count(keep.begin(), keep.end(), true);
  CurveData out;
  out.x.resize(n);
  out.y.resize(n);
  if (d.sigma.size()) out.sigma.resize(n);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    if (!keep[i]) continue;
    out.x[j] = d.x[i];
    out.y[j] = d.y[i];
    if (d.sigma.size()) out.sigma[j] = d.sigma[i];
    ++j;
  }
  return out;
}

Real voigt_fwhm_sigma(const FitResult& r) {
  // Olivero-Longbothum width of the fitted widths, with the (fwhm_l, fwhm_g)
  // covariance block propagated through its gradient.
  const Real fl = std::max(r.value("fwhm_l"), 0.0);
  const Real fg = std::max(r.value("fwhm_g"), 0.0);
  const Real root = std::sqrt(std::max(0.2166 * fl * fl + fg * fg, 1e-300));
  const Real dfl = 0.5346 + 0.2166 * fl / root;
  const Real dfg = fg / root;
  if (r.covariance.rows() < 3) return 0.0;
  const Real var = dfl * dfl * r.covariance(1, 1) + dfg * dfg * r.covariance(2, 2) +
                   2 * dfl * dfg * r.covariance(1, 2);
  return var > 0 ? std::sqrt(var) : 0.0;
}

}  // namespace

FitResult least_squares(const ModelSpec& spec, const CurveData& data, const LMOptions& opts) {
  validate(data);
  check_fixed(spec);
  switch (spec.kind) {
    case ModelKind::voigt: {
      CurveModel m = make_voigt_model(data, spec);
      apply_bounds(m, spec);
      FitResult r = levenberg_marquardt(m, data, opts);
      append_param(r, "fwhm", voigt_fwhm(r.value("fwhm_l"), r.value("fwhm_g")),
                   voigt_fwhm_sigma(r), "GHz");
      return r;
    }
    case ModelKind::multi_voigt: {
      CurveModel m = make_multi_voigt_model(data, spec);
      apply_bounds(m, spec);
      return levenberg_marquardt(m, data, opts);
    }
    case ModelKind::bilorentzian: {
      CurveModel m = make_bilorentzian_model(data, spec);
      apply_bounds(m, spec);
      FitResult r = levenberg_marquardt(m, data, opts);
      // A hole that fits to a sliver of the background is reported as absent.
      const Real bg = r.value("bg_amplitude");
      if (r.value("hole_amplitude") < 1e-3 * std::max(bg, 1e-300)) r.flags.push_back("no_hole");
      append_param(r, "hole_fwhm_half", r.value("hole_fwhm") / 2, r.sigma("hole_fwhm") / 2, "GHz");
      return r;
    }
    case ModelKind::power_broadening: {
      CurveModel m = make_power_model(data, spec);
      apply_bounds(m, spec);
      FitResult r = levenberg_marquardt(m, data, opts);

      // Straight-line comparison: when the line matches at least as well,
      // or the saturation power runs away, the curvature is unresolvable.
      MatrixX design(data.x.size(), 2);
      design.col(0).setOnes();
      design.col(1) = data.x.matrix();
      const VectorX line = linear_solve(design, data.y);
      const Real line_cost = (design * line - data.y.matrix()).squaredNorm();
      const Real sqrt_cost = r.residual_norm * r.residual_norm;
      const Real p_sat_cap = m.upper[1];
      const bool diverged = r.value("p_sat") > 0.01 * p_sat_cap || !r.converged ||
                            line_cost <= sqrt_cost * (1 + 1e-9) + 1e-300;
      if (diverged) {
        CurveModel lm;
        lm.name = "power_broadening";
        lm.param_names = {"gamma0", "slope"};
        lm.param_units = {"GHz", "GHz/arb"};
        lm.init.resize(2);
        lm.init << line[0], line[1];
        lm.eval = [](const ArrayX& x, const VectorX& p) -> ArrayX { return p[0] + p[1] * x; };
        r = levenberg_marquardt(lm, data, opts);
        r.flags.push_back("linear_fallback");
      }

      // Widths should grow with power; a decrease beyond the residual scale
      // is suspicious data.
      const Real resid_scale = 2 * r.residual_norm / std::sqrt(static_cast<Real>(data.x.size()));
      for (Eigen::Index i = 0; i + 1 < data.x.size(); ++i)
        if (data.y[i + 1] < data.y[i] - std::max(resid_scale, 1e-12)) {
          r.flags.push_back("non_monotone");
          break;
        }
      return r;
    }
    case ModelKind::t_poly: {
      CurveModel m = make_tpoly_model(data, spec);
      apply_bounds(m, spec);
      FitResult r = levenberg_marquardt(m, data, opts);
      const auto fixed = spec.fixed_params.find("const");
      if (fixed != spec.fixed_params.end())
        append_param(r, "const", fixed->second, 0.0, "GHz");
      return r;
    }
    case ModelKind::t_shift: {
      CurveModel m = make_tshift_model(data, spec);
      apply_bounds(m, spec);
      return levenberg_marquardt(m, data, opts);
    }
    case ModelKind::phonon_strain: {
      const CurveData kept = drop_indices(data, spec.exclude);
      validate(kept);
      CurveModel m = make_phonon_model(kept, spec);
      apply_bounds(m, spec);
      FitResult r = levenberg_marquardt(m, kept, opts);
      append_param(r, "temperature_k", spec.fixed_params.at("temperature_k"), 0.0, "K");
      return r;
    }
  }
  throw ConfigError("fit: unknown model kind");
}

FitResult least_squares(const ModelSpec& spec, const Spectrum& s, const LMOptions& opts) {
  validate(s);
  CurveData d;
  d.x = s.frequency_ghz;
  d.y = s.intensity;
  return least_squares(spec, d, opts);
}

FitResult fit_voigt(const CurveData& data, const std::map<std::string, Real>& init) {
  ModelSpec spec;
  spec.kind = ModelKind::voigt;
  spec.init = init;
  return least_squares(spec, data);
}

FitResult fit_multi_voigt(const CurveData& data, int n_peaks,
                          const std::map<std::string, Real>& init) {
  ModelSpec spec;
  spec.kind = ModelKind::multi_voigt;
  spec.n_peaks = n_peaks;
  spec.init = init;
  return least_squares(spec, data);
}

FitResult fit_bilorentzian(const CurveData& data, const std::map<std::string, Real>& init) {
  ModelSpec spec;
  spec.kind = ModelKind::bilorentzian;
  spec.init = init;
  return least_squares(spec, data);
}

FitResult extrapolate_zero_power(const CurveData& series) {
  ModelSpec spec;
  spec.kind = ModelKind::power_broadening;
  return least_squares(spec, series);
}

FitResult fit_temperature_linewidth(const CurveData& data, const std::vector<int>& terms,
                                    bool fix_const, Real const_value) {
  ModelSpec spec;
  spec.kind = ModelKind::t_poly;
  spec.terms = terms;
  if (fix_const) spec.fixed_params["const"] = const_value;
  return least_squares(spec, data);
}

FitResult fit_temperature_shift(const CurveData& data) {
  ModelSpec spec;
  spec.kind = ModelKind::t_shift;
  return least_squares(spec, data);
}

FitResult fit_phonon_model(const CurveData& data, Real temperature_k, bool with_offset,
                           const std::vector<Eigen::Index>& exclude) {
  ModelSpec spec;
  spec.kind = ModelKind::phonon_strain;
  spec.fixed_params["temperature_k"] = temperature_k;
  spec.with_offset = with_offset;
  spec.exclude = exclude;
  return least_squares(spec, data);
}

}  // namespace sivspec
