#include "sivspec/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "sivspec/ensemble.hpp"
#include "sivspec/holeburn.hpp"
#include "sivspec/lambda_system.hpp"
#include "sivspec/lineshapes.hpp"
#include "sivspec/run_config.hpp"
#include "sivspec/spectrum_io.hpp"
#include "sivspec/svg.hpp"

namespace sivspec {

namespace {

namespace fs = std::filesystem;

std::string joined(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

Real parse_real(const std::string& text, const std::string& what) {
  Real v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

// Emits one spectrum under the given stem and records the file names.
void emit_spectrum(const Spectrum& s, const std::string& stem, const std::string& format,
                   bool plot, const std::string& out_dir, RunReport& report) {
  if (format == "csv") {
    const std::string name = stem + ".csv";
    atomic_write_text(joined(out_dir, name), spectrum_to_csv(s));
    report.outputs.push_back(name);
  } else {
    const std::string name = stem + ".json";
    atomic_write_text(joined(out_dir, name), spectrum_to_json(s));
    report.outputs.push_back(name);
  }
  if (plot) {
    const std::string name = stem + ".svg";
    atomic_write_text(joined(out_dir, name), render_spectrum_svg(s, nullptr, stem));
    report.outputs.push_back(name);
  }
}

Spectrum with_noise(Spectrum s, const NoiseModel& noise, std::uint64_t file_index) {
  if (noise.kind == NoiseModel::Kind::none) return s;
  NoiseModel per_file = noise;
  per_file.seed = noise.seed + file_index;  // distinct but reproducible streams
  return add_noise(s, per_file);
}

void warn_if_undersampled(const RunConfig& cfg, Real min_temperature_k, RunReport& report) {
  Real fl = lifetime_limited_linewidth(cfg.ensemble.tau_ns) +
            homogeneous_width(min_temperature_k, cfg.ensemble.law);
  const Real fwhm = voigt_fwhm(fl, cfg.ensemble.gamma_inh_ghz);
  if (cfg.scan.grid.spacing() > fwhm / 5)
    report.warnings.push_back("scan spacing " + format_double(cfg.scan.grid.spacing()) +
                              " GHz undersamples the narrowest line (Voigt FWHM " +
                              format_double(fwhm) + " GHz)");
}

void run_ple(const RunConfig& cfg, const std::string& format, bool plot,
             const std::string& out_dir, RunReport& report) {
  if (cfg.ensemble.isotopes.empty())
    throw ConfigError("simulate ple: config defines no [ensemble.isotope] blocks");
  warn_if_undersampled(cfg, cfg.ensemble.temperature_k, report);
  Spectrum s = synthesize_ple(cfg.ensemble, cfg.scan.grid);
  emit_spectrum(with_noise(std::move(s), cfg.noise, 0), "ple", format, plot, out_dir, report);
}

void run_sweep(const RunConfig& cfg, const std::string& format, bool plot,
               const std::string& out_dir, RunReport& report) {
  if (cfg.ensemble.isotopes.empty())
    throw ConfigError("simulate sweep: config defines no [ensemble.isotope] blocks");
  if (cfg.scan.temperatures_k.empty())
    throw ConfigError("simulate sweep: scan.temperatures_k is empty");
  std::set<std::string> stems;
  for (Real t : cfg.scan.temperatures_k)
    if (!stems.insert("sweep_T" + format_double(t)).second)
      throw ConfigError("simulate sweep: duplicate temperature " + format_double(t));
  warn_if_undersampled(
      cfg, *std::min_element(cfg.scan.temperatures_k.begin(), cfg.scan.temperatures_k.end()),
      report);
  const std::vector<Spectrum> specs =
      temperature_sweep(cfg.ensemble, cfg.scan.grid, cfg.scan.temperatures_k);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string stem = "sweep_T" + format_double(cfg.scan.temperatures_k[i]);
    emit_spectrum(with_noise(specs[i], cfg.noise, i), stem, format, plot, out_dir, report);
  }
}

void run_holeburn(const RunConfig& cfg, const std::string& format, bool plot,
                  const std::string& out_dir, RunReport& report) {
  std::vector<Real> powers = cfg.scan.powers;
  if (powers.empty()) powers.push_back(cfg.holeburn.s_pump);
  std::set<std::string> stems;
  for (Real p : powers)
    if (!stems.insert("holeburn_s" + format_double(p)).second)
      throw ConfigError("simulate holeburn: duplicate pump power " + format_double(p));
  const ArrayX detunings = cfg.scan.grid.frequencies();
  for (std::size_t i = 0; i < powers.size(); ++i) {
    HoleBurnConfig hb = cfg.holeburn;
    hb.s_pump = powers[i];
    validate(hb);
    if (hb.s_pump == 0)
      report.warnings.push_back("pump power 0 burns no hole (holeburn_s0)");
    Spectrum s = holeburn_scan(hb, detunings);
    const std::string stem = "holeburn_s" + format_double(powers[i]);
    emit_spectrum(with_noise(std::move(s), cfg.noise, i), stem, format, plot, out_dir, report);
  }
}

void run_cpt(const RunConfig& cfg, const std::string& format, bool plot,
             const std::string& out_dir, RunReport& report) {
  Spectrum s = cpt_scan(cfg.lambda, cfg.scan.grid.frequencies());
  emit_spectrum(with_noise(std::move(s), cfg.noise, 0), "cpt", format, plot, out_dir, report);
}

void run_g2(const RunConfig& cfg, const std::string& format, bool plot,
            const std::string& out_dir, RunReport& report) {
  Spectrum s;
  s.frequency_ghz = ArrayX::LinSpaced(cfg.scan.grid.points, cfg.scan.tau_start_ns,
                                      cfg.scan.tau_stop_ns);
  s.intensity.resize(s.frequency_ghz.size());
  for (Eigen::Index i = 0; i < s.frequency_ghz.size(); ++i)
    s.intensity[i] = g2_two_level(s.frequency_ghz[i], cfg.g2.gamma_ghz, cfg.g2.pump_rate_ghz);
  s.meta["kind"] = "g2";
  s.meta["x_column"] = "tau_ns";
  s.meta["y_column"] = "g2";
  s.meta["gamma_ghz"] = format_double(cfg.g2.gamma_ghz);
  s.meta["pump_rate_ghz"] = format_double(cfg.g2.pump_rate_ghz);
  emit_spectrum(with_noise(std::move(s), cfg.noise, 0), "g2", format, plot, out_dir, report);
}

void write_run_report(const RunReport& report, const std::string& out_dir) {
  nlohmann::json j;
  j["command"] = report.command;
  j["config"] = report.config_path;
  j["digest"] = report.digest;
  j["version"] = report.version;
  j["outputs"] = report.outputs;
  j["warnings"] = report.warnings;
  atomic_write_text(joined(out_dir, "run_report.json"), j.dump(2) + "\n");
}

ModelKind kind_of(const std::string& model) {
  if (model == "voigt") return ModelKind::voigt;
  if (model == "multipeak") return ModelKind::multi_voigt;
  if (model == "bilorentzian") return ModelKind::bilorentzian;
  if (model == "power") return ModelKind::power_broadening;
  if (model == "tpoly") return ModelKind::t_poly;
  if (model == "tshift") return ModelKind::t_shift;
  if (model == "phonon") return ModelKind::phonon_strain;
  throw ConfigError("fit: unknown model '" + model + "'");
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string tok = text.substr(start, comma - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ConfigError(what + ": not an integer: '" + tok + "'");
    out.push_back(v);
    if (comma == text.size()) break;
    start = comma + 1;
  }
  return out;
}

// Defaults file for fit runs: [fit] model = ...; [fit.init] / [fit.bounds]
// per-parameter entries; model-specific keys under [fit.phonon] etc.
void apply_fit_config(ModelSpec& spec, const FitOptions& opts) {
  const auto entries = load_flat_config(opts.config_path);
  for (const auto& [path, e] : entries) {
    if (path == "fit.model") {
      if (e.value != opts.model)
        throw ConfigError(e.where + ": config is for model '" + e.value +
                          "' but the command requested '" + opts.model + "'");
    } else if (path == "fit.phonon.temperature_k" && opts.model == "phonon") {
      spec.fixed_params["temperature_k"] = parse_real(e.value, e.where);
    } else if (path == "fit.phonon.with_offset" && opts.model == "phonon") {
      if (e.value != "true" && e.value != "false")
        throw ConfigError(e.where + ": with_offset must be true or false");
      spec.with_offset = e.value == "true";
    } else if (path == "fit.phonon.exclude" && opts.model == "phonon") {
      spec.exclude.clear();
      for (int idx : parse_int_list(e.value, e.where)) spec.exclude.push_back(idx);
    } else if (path == "fit.tpoly.terms" && opts.model == "tpoly") {
      spec.terms = parse_int_list(e.value, e.where);
    } else if (path == "fit.tpoly.const" && opts.model == "tpoly") {
      spec.fixed_params["const"] = parse_real(e.value, e.where);
    } else if (path == "fit.multipeak.peaks" && opts.model == "multipeak") {
      spec.n_peaks = static_cast<int>(parse_real(e.value, e.where));
    } else if (path.rfind("fit.init.", 0) == 0) {
      spec.init[path.substr(9)] = parse_real(e.value, e.where);
    } else if (path.rfind("fit.bounds.", 0) == 0) {
      const auto colon = e.value.find(':');
      if (colon == std::string::npos)
        throw ConfigError(e.where + ": bounds must be written lo:hi");
      spec.bounds[path.substr(11)] = {parse_real(e.value.substr(0, colon), e.where),
                                      parse_real(e.value.substr(colon + 1), e.where)};
    } else {
      throw ConfigError(e.where + ": unknown key '" + path + "' for model '" + opts.model + "'");
    }
  }
}

}  // namespace

RunReport cmd_simulate(const SimulateOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();

  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.seed) cfg.noise.seed = *opts.seed;
  std::string format = opts.format.value_or(cfg.output.format);
  if (format != "csv" && format != "json")
    throw ConfigError("simulate: format must be csv or json, got '" + format + "'");
  const bool plot = opts.plot || cfg.output.plot;

  const std::string out_dir = opts.out_dir.value_or(cfg.output.dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("simulate: cannot create output directory '" + out_dir + "'");

  RunReport report;
  report.command = "simulate " + opts.mode;
  report.config_path = opts.config_path;
  report.digest = cfg.digest;
  report.version = tool_version;
  report.out_dir = out_dir;

  if (opts.mode == "ple") run_ple(cfg, format, plot, out_dir, report);
  else if (opts.mode == "sweep") run_sweep(cfg, format, plot, out_dir, report);
  else if (opts.mode == "holeburn") run_holeburn(cfg, format, plot, out_dir, report);
  else if (opts.mode == "cpt") run_cpt(cfg, format, plot, out_dir, report);
  else if (opts.mode == "g2") run_g2(cfg, format, plot, out_dir, report);
  else throw ConfigError("simulate: unknown mode '" + opts.mode + "'");

  write_run_report(report, out_dir);
  report.outputs.push_back("run_report.json");
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

FitResult cmd_fit(const FitOptions& opts) {
  ModelSpec spec;
  spec.kind = kind_of(opts.model);

  if (!opts.config_path.empty()) apply_fit_config(spec, opts);

  // Command-line settings override the defaults file.
  if (!opts.terms.empty()) spec.terms = opts.terms;
  if (opts.peaks) spec.n_peaks = *opts.peaks;
  if (opts.with_offset) spec.with_offset = true;
  if (opts.fix_const) spec.fixed_params["const"] = *opts.fix_const;
  if (opts.temperature_k) spec.fixed_params["temperature_k"] = *opts.temperature_k;
  if (!opts.exclude.empty()) {
    spec.exclude.clear();
    for (long idx : opts.exclude) spec.exclude.push_back(idx);
  }
  for (const std::string& kv : opts.init) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("fit: --init expects name=value, got '" + kv + "'");
    spec.init[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1), "--init " + kv);
  }
  for (const std::string& kv : opts.bounds) {
    const auto eq = kv.find('=');
    const auto colon = kv.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || eq == 0 || colon == std::string::npos)
      throw ConfigError("fit: --bound expects name=lo:hi, got '" + kv + "'");
    spec.bounds[kv.substr(0, eq)] = {parse_real(kv.substr(eq + 1, colon - eq - 1), "--bound " + kv),
                                     parse_real(kv.substr(colon + 1), "--bound " + kv)};
  }

  const CurveTable table = read_curve_csv(opts.in_path);
  const FitResult result = least_squares(spec, table.data);
  write_fit_result_json(result, opts.out_path);
  return result;
}

}  // namespace sivspec
