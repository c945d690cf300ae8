#include "sivspec/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sivspec/spectrum_io.hpp"

namespace sivspec {

namespace {

struct Entry {
  std::string value;
  std::string where;  // origin:line for error messages
  bool used = false;
};

// Parsed config: scalar entries keyed by "section.key", plus the ordered
// list of isotope blocks (a repeatable section).
struct Parsed {
  std::map<std::string, Entry> scalars;
  std::vector<std::map<std::string, Entry>> isotopes;
  std::string origin;
};

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

Parsed parse_text(const std::string& text, const std::string& origin) {
  Parsed out;
  out.origin = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  bool in_isotope = false;
  int lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      in_isotope = section == "ensemble.isotope";
      if (in_isotope) out.isotopes.emplace_back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside any section");

    if (in_isotope) {
      auto& block = out.isotopes.back();
      if (block.count(key))
        throw ConfigError(where + ": duplicate key '" + key + "' in isotope block");
      block[key] = {value, where, false};
    } else {
      const std::string path = section + "." + key;
      if (out.scalars.count(path)) throw ConfigError(where + ": duplicate key '" + path + "'");
      out.scalars[path] = {value, where, false};
    }
  }
  return out;
}

Real to_real(const Entry& e, const std::string& path) {
  Real v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(e.where + ": '" + path + "' is not a number: '" + e.value + "'");
  return v;
}

bool to_bool(const Entry& e, const std::string& path) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError(e.where + ": '" + path + "' must be true or false");
}

std::uint64_t to_u64(const Entry& e, const std::string& path) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(e.where + ": '" + path + "' is not a nonnegative integer");
  return v;
}

std::vector<Real> to_real_list(const Entry& e, const std::string& path) {
  std::vector<Real> out;
  std::size_t start = 0;
  const std::string& s = e.value;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const std::string tok = trim(s.substr(start, comma - start));
    if (tok.empty()) throw ConfigError(e.where + ": '" + path + "' has an empty list element");
    Real v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ConfigError(e.where + ": '" + path + "' has a non-numeric element '" + tok + "'");
    out.push_back(v);
    start = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

// FNV-1a over the canonical dump: sorted "path=value" lines with numbers
// re-serialized from their parsed form, isotope blocks in file order.
std::string digest_of(const Parsed& p) {
  std::vector<std::string> lines;
  auto canonical = [](const std::string& path, const Entry& e) {
    Real v = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec == std::errc() && ptr == e.value.data() + e.value.size())
      return path + "=" + format_double(v);
    return path + "=" + e.value;
  };
  for (const auto& [path, e] : p.scalars) lines.push_back(canonical(path, e));
  for (std::size_t i = 0; i < p.isotopes.size(); ++i)
    for (const auto& [key, e] : p.isotopes[i])
      lines.push_back(canonical("ensemble.isotope[" + std::to_string(i) + "]." + key, e));
  std::sort(lines.begin(), lines.end());

  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& l : lines)
    for (unsigned char c : l + "\n") {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  Parsed p = parse_text(text, origin);
  RunConfig cfg;
  cfg.digest = digest_of(p);

  auto take = [&](const std::string& path) -> Entry* {
    auto it = p.scalars.find(path);
    if (it == p.scalars.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  };
  auto real_or = [&](const std::string& path, Real fallback) {
    Entry* e = take(path);
    return e ? to_real(*e, path) : fallback;
  };

  cfg.constants.kb_over_h_ghz_per_k =
      real_or("constants.kb_over_h_ghz_per_k", cfg.constants.kb_over_h_ghz_per_k);
  cfg.constants.c_nm_ghz = real_or("constants.c_nm_ghz", cfg.constants.c_nm_ghz);
  validate(cfg.constants);

  cfg.ensemble.constants = cfg.constants;
  cfg.ensemble.temperature_k = real_or("ensemble.temperature_k", cfg.ensemble.temperature_k);
  cfg.ensemble.gamma_inh_ghz = real_or("ensemble.gamma_inh_ghz", cfg.ensemble.gamma_inh_ghz);
  cfg.ensemble.tau_ns = real_or("ensemble.tau_ns", cfg.ensemble.tau_ns);
  cfg.ensemble.tau_upper_ns = real_or("ensemble.tau_upper_ns", cfg.ensemble.tau_upper_ns);
  cfg.ensemble.detection_efficiency =
      real_or("ensemble.detection_efficiency", cfg.ensemble.detection_efficiency);
  if (Entry* e = take("ensemble.amplitude_overrides")) {
    const std::vector<Real> w = to_real_list(*e, "ensemble.amplitude_overrides");
    if (w.size() != 4)
      throw ConfigError(e->where + ": amplitude_overrides needs exactly 4 values (A,B,C,D)");
    cfg.ensemble.amplitude_overrides = std::array<Real, 4>{w[0], w[1], w[2], w[3]};
  }
  cfg.ensemble.law.a1 = real_or("ensemble.broadening.a1", cfg.ensemble.law.a1);
  cfg.ensemble.law.a3 = real_or("ensemble.broadening.a3", cfg.ensemble.law.a3);
  cfg.ensemble.law.a5 = real_or("ensemble.broadening.a5", cfg.ensemble.law.a5);
  cfg.ensemble.law.a7 = real_or("ensemble.broadening.a7", cfg.ensemble.law.a7);
  cfg.ensemble.law.b2 = real_or("ensemble.broadening.b2", cfg.ensemble.law.b2);
  cfg.ensemble.law.b4 = real_or("ensemble.broadening.b4", cfg.ensemble.law.b4);

  for (std::size_t i = 0; i < p.isotopes.size(); ++i) {
    auto& block = p.isotopes[i];
    const std::string prefix = "ensemble.isotope[" + std::to_string(i) + "].";
    IsotopeSpecies iso;
    for (auto& [key, e] : block) {
      e.used = true;
      if (key == "label") iso.label = e.value;
      else if (key == "abundance") iso.abundance = to_real(e, prefix + key);
      else if (key == "zpl_offset_ghz") iso.zpl_offset_ghz = to_real(e, prefix + key);
      else if (key == "delta_gs_ghz") iso.fine.delta_gs_ghz = to_real(e, prefix + key);
      else if (key == "delta_es_ghz") iso.fine.delta_es_ghz = to_real(e, prefix + key);
      else throw ConfigError(e.where + ": unknown key '" + prefix + key + "'");
    }
    validate(iso);
    cfg.ensemble.isotopes.push_back(iso);
  }

  cfg.lambda.gamma_e_ghz = real_or("dynamics.lambda.gamma_e_ghz", cfg.lambda.gamma_e_ghz);
  cfg.lambda.branching = real_or("dynamics.lambda.branching", cfg.lambda.branching);
  cfg.lambda.gamma_gs_ghz = real_or("dynamics.lambda.gamma_gs_ghz", cfg.lambda.gamma_gs_ghz);
  cfg.lambda.delta_gs_ghz = real_or("dynamics.lambda.delta_gs_ghz", cfg.lambda.delta_gs_ghz);
  cfg.lambda.omega_pump_ghz = real_or("dynamics.lambda.omega_pump_ghz", cfg.lambda.omega_pump_ghz);
  cfg.lambda.omega_probe_ghz =
      real_or("dynamics.lambda.omega_probe_ghz", cfg.lambda.omega_probe_ghz);
  cfg.lambda.detuning_pump_ghz =
      real_or("dynamics.lambda.detuning_pump_ghz", cfg.lambda.detuning_pump_ghz);
  cfg.lambda.detuning_probe_ghz =
      real_or("dynamics.lambda.detuning_probe_ghz", cfg.lambda.detuning_probe_ghz);
  validate(cfg.lambda);

  cfg.holeburn.gamma_hom_ghz = real_or("dynamics.holeburn.gamma_hom_ghz", cfg.holeburn.gamma_hom_ghz);
  cfg.holeburn.gamma_inh_ghz = real_or("dynamics.holeburn.gamma_inh_ghz", cfg.holeburn.gamma_inh_ghz);
  cfg.holeburn.s_pump = real_or("dynamics.holeburn.s_pump", cfg.holeburn.s_pump);
  cfg.holeburn.s_probe = real_or("dynamics.holeburn.s_probe", cfg.holeburn.s_probe);
  cfg.holeburn.nu_pump_ghz = real_or("dynamics.holeburn.nu_pump_ghz", cfg.holeburn.nu_pump_ghz);
  cfg.holeburn.quad_rel_tol = real_or("dynamics.holeburn.quad_rel_tol", cfg.holeburn.quad_rel_tol);
  validate(cfg.holeburn);

  cfg.g2.gamma_ghz = real_or("dynamics.g2.gamma_ghz", cfg.g2.gamma_ghz);
  cfg.g2.pump_rate_ghz = real_or("dynamics.g2.pump_rate_ghz", cfg.g2.pump_rate_ghz);
  validate(cfg.g2);

  cfg.scan.grid.start_ghz = real_or("scan.start_ghz", cfg.scan.grid.start_ghz);
  cfg.scan.grid.stop_ghz = real_or("scan.stop_ghz", cfg.scan.grid.stop_ghz);
  if (Entry* e = take("scan.points")) {
    const Real v = to_real(*e, "scan.points");
    if (v < 2 || v != std::floor(v))
      throw ConfigError(e->where + ": scan.points must be an integer >= 2");
    cfg.scan.grid.points = static_cast<int>(v);
  }
  validate(cfg.scan.grid);
  if (Entry* e = take("scan.temperatures_k")) cfg.scan.temperatures_k = to_real_list(*e, "scan.temperatures_k");
  if (Entry* e = take("scan.powers")) cfg.scan.powers = to_real_list(*e, "scan.powers");
  cfg.scan.tau_start_ns = real_or("scan.tau_start_ns", cfg.scan.tau_start_ns);
  cfg.scan.tau_stop_ns = real_or("scan.tau_stop_ns", cfg.scan.tau_stop_ns);
  if (!(cfg.scan.tau_stop_ns > cfg.scan.tau_start_ns) || cfg.scan.tau_start_ns < 0)
    throw ConfigError(origin + ": scan tau window must satisfy 0 <= start < stop");

  if (Entry* e = take("noise.kind")) {
    if (e->value == "none") cfg.noise.kind = NoiseModel::Kind::none;
    else if (e->value == "shot") cfg.noise.kind = NoiseModel::Kind::shot;
    else throw ConfigError(e->where + ": noise.kind must be none or shot");
  }
  cfg.noise.scale = real_or("noise.scale", cfg.noise.scale);
  if (Entry* e = take("noise.seed")) cfg.noise.seed = to_u64(*e, "noise.seed");
  validate(cfg.noise);

  if (Entry* e = take("output.format")) {
    if (e->value != "csv" && e->value != "json")
      throw ConfigError(e->where + ": output.format must be csv or json");
    cfg.output.format = e->value;
  }
  if (Entry* e = take("output.dir")) {
    if (e->value.empty()) throw ConfigError(e->where + ": output.dir must not be empty");
    cfg.output.dir = e->value;
  }
  if (Entry* e = take("output.plot")) cfg.output.plot = to_bool(*e, "output.plot");

  for (const auto& [path, e] : p.scalars)
    if (!e.used) throw ConfigError(e.where + ": unknown key '" + path + "'");

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

std::map<std::string, ConfigEntry> parse_flat_config(const std::string& text,
                                                     const std::string& origin) {
  Parsed p = parse_text(text, origin);
  if (!p.isotopes.empty())
    throw ConfigError(origin + ": [ensemble.isotope] blocks are not allowed here");
  std::map<std::string, ConfigEntry> out;
  for (const auto& [path, e] : p.scalars) out[path] = {e.value, e.where};
  return out;
}

std::map<std::string, ConfigEntry> load_flat_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_flat_config(ss.str(), path);
}

}  // namespace sivspec
