#include "sivspec/spectrum_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sivspec {

std::string format_double(Real v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw NumericalError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

Real parse_double(std::string_view tok, const std::string& where) {
  Real v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("invalid number '" + std::string(tok) + "' in " + where);
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& s : out) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  }
  return out;
}

}  // namespace

std::string spectrum_to_csv(const Spectrum& s) {
  validate(s);
  const std::string xcol = s.meta.count("x_column") ? s.meta.at("x_column") : "frequency_ghz";
  const std::string ycol = s.meta.count("y_column") ? s.meta.at("y_column") : "intensity";
  std::string out = xcol + "," + ycol + "\n";
  for (Eigen::Index i = 0; i < s.frequency_ghz.size(); ++i)
    out += format_double(s.frequency_ghz[i]) + "," + format_double(s.intensity[i]) + "\n";
  return out;
}

void write_spectrum_csv(const Spectrum& s, const std::string& path) {
  atomic_write_text(path, spectrum_to_csv(s));
}

Spectrum read_spectrum_csv(const std::string& path) {
  const CurveTable table = read_curve_csv(path);
  Spectrum s;
  s.frequency_ghz = table.data.x;
  s.intensity = table.data.y;
  if (table.columns[0] != "frequency_ghz") s.meta["x_column"] = table.columns[0];
  if (table.columns[1] != "intensity") s.meta["y_column"] = table.columns[1];
  validate(s);
  return s;
}

CurveTable read_curve_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty file: " + path);
  CurveTable table;
  table.columns = split_csv_line(line);
  if (table.columns.size() != 2 && table.columns.size() != 3)
    throw ConfigError(path + ": expected 2 or 3 columns, got " +
                      std::to_string(table.columns.size()));

  std::vector<Real> x, y, sg;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto toks = split_csv_line(line);
    if (toks.size() != table.columns.size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong number of fields");
    const std::string where = path + ":" + std::to_string(lineno);
    x.push_back(parse_double(toks[0], where));
    y.push_back(parse_double(toks[1], where));
    if (toks.size() == 3) sg.push_back(parse_double(toks[2], where));
  }
  if (x.empty()) throw ConfigError(path + ": no data rows");

  table.data.x = Eigen::Map<ArrayX>(x.data(), static_cast<Eigen::Index>(x.size()));
  table.data.y = Eigen::Map<ArrayX>(y.data(), static_cast<Eigen::Index>(y.size()));
  if (!sg.empty())
    table.data.sigma = Eigen::Map<ArrayX>(sg.data(), static_cast<Eigen::Index>(sg.size()));
  validate(table.data);
  return table;
}

std::string spectrum_to_json(const Spectrum& s) {
  validate(s);
  nlohmann::json j;
  j["frequency_ghz"] = std::vector<Real>(s.frequency_ghz.data(),
                                         s.frequency_ghz.data() + s.frequency_ghz.size());
  j["intensity"] =
      std::vector<Real>(s.intensity.data(), s.intensity.data() + s.intensity.size());
  j["meta"] = s.meta;
  return j.dump(2) + "\n";
}

void write_spectrum_json(const Spectrum& s, const std::string& path) {
  atomic_write_text(path, spectrum_to_json(s));
}

Spectrum read_spectrum_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  Spectrum s;
  try {
    const auto& fx = j.at("frequency_ghz");
    const auto& fy = j.at("intensity");
    s.frequency_ghz.resize(static_cast<Eigen::Index>(fx.size()));
    s.intensity.resize(static_cast<Eigen::Index>(fy.size()));
    for (Eigen::Index i = 0; i < s.frequency_ghz.size(); ++i)
      s.frequency_ghz[i] = fx.at(static_cast<std::size_t>(i)).get<Real>();
    for (Eigen::Index i = 0; i < s.intensity.size(); ++i)
      s.intensity[i] = fy.at(static_cast<std::size_t>(i)).get<Real>();
    if (j.contains("meta"))
      s.meta = j.at("meta").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  validate(s);
  return s;
}

std::string fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["model"] = r.model;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, p] : r.params)
    params[name] = {{"value", p.value}, {"sigma", p.sigma}, {"unit", p.unit}};
  j["params"] = params;
  j["chi2_per_dof"] = r.chi2_per_dof;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual_norm"] = r.residual_norm;
  j["flags"] = r.flags;
  return j.dump(2) + "\n";
}

void write_fit_result_json(const FitResult& r, const std::string& path) {
  atomic_write_text(path, fit_result_to_json(r));
}

}  // namespace sivspec
