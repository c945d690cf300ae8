#pragma once

#include <optional>
#include <string>

#include "sivspec/spectrum.hpp"

namespace sivspec {

// Self-contained SVG line plot of a spectrum, optionally with a model curve
// overlaid.  Output is deterministic: fixed canvas, fixed tick layout, and
// shortest-round-trip number formatting.
std::string render_spectrum_svg(const Spectrum& data, const Spectrum* overlay = nullptr,
                                const std::string& title = "");

}  // namespace sivspec
