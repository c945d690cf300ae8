#pragma once

#include <string>
#include <vector>

#include "sivspec/fit.hpp"
#include "sivspec/spectrum.hpp"

namespace sivspec {

// Shortest decimal form that round-trips to the same double; '.' decimal
// separator regardless of locale.
std::string format_double(Real v);

// Writes content to path via a temporary file and rename, so readers never
// observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

// CSV with a one-line header and LF line endings.  Column names default to
// "frequency_ghz,intensity" and can be overridden through spectrum meta keys
// "x_column" / "y_column" (used by correlation scans).
std::string spectrum_to_csv(const Spectrum& s);
void write_spectrum_csv(const Spectrum& s, const std::string& path);
Spectrum read_spectrum_csv(const std::string& path);

// JSON object with the two arrays plus the metadata map.
std::string spectrum_to_json(const Spectrum& s);
void write_spectrum_json(const Spectrum& s, const std::string& path);
Spectrum read_spectrum_json(const std::string& path);

// Generic numeric table for fit inputs: one header line naming 2 or 3
// columns; a third column is taken as per-point sigma.
struct CurveTable {
  CurveData data;
  std::vector<std::string> columns;
};
CurveTable read_curve_csv(const std::string& path);

std::string fit_result_to_json(const FitResult& r);
void write_fit_result_json(const FitResult& r, const std::string& path);

}  // namespace sivspec
