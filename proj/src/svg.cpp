#include "sivspec/svg.hpp"

#include <algorithm>
#include <cmath>

#include "sivspec/spectrum_io.hpp"

namespace sivspec {

namespace {

constexpr Real width = 800, height = 500;
constexpr Real margin_l = 70, margin_r = 20, margin_t = 40, margin_b = 50;

// Round a coordinate to 0.01 px so the text form stays short and stable.
std::string px(Real v) { return format_double(std::round(v * 100) / 100); }

// Tick positions: a "nice" step (1/2/5 times a power of ten) covering the range.
std::vector<Real> ticks(Real lo, Real hi) {
  const Real span = hi - lo;
  const Real raw = span / 6;
  const Real mag = std::pow(10.0, std::floor(std::log10(raw)));
  Real step = mag;
  for (Real m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<Real> out;
  const Real first = std::ceil(lo / step) * step;
  for (Real t = first; t <= hi + step * 1e-9; t += step) out.push_back(t);
  return out;
}

std::string polyline(const Spectrum& s, Real xlo, Real xspan, Real ylo, Real yspan,
                     const std::string& color, const std::string& extra) {
  std::string pts;
  for (Eigen::Index i = 0; i < s.frequency_ghz.size(); ++i) {
    const Real x = margin_l + (s.frequency_ghz[i] - xlo) / xspan * (width - margin_l - margin_r);
    const Real y =
        height - margin_b - (s.intensity[i] - ylo) / yspan * (height - margin_t - margin_b);
    if (!pts.empty()) pts += " ";
    pts += px(x) + "," + px(y);
  }
  return "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" + extra +
         " points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_spectrum_svg(const Spectrum& data, const Spectrum* overlay,
                                const std::string& title) {
  validate(data);
  if (overlay) validate(*overlay);

  Real xlo = data.frequency_ghz.minCoeff();
  Real xhi = data.frequency_ghz.maxCoeff();
  Real ylo = data.intensity.minCoeff();
  Real yhi = data.intensity.maxCoeff();
  if (overlay) {
    ylo = std::min(ylo, overlay->intensity.minCoeff());
    yhi = std::max(yhi, overlay->intensity.maxCoeff());
  }
  if (!std::isfinite(xlo) || !std::isfinite(xhi) || !std::isfinite(ylo) || !std::isfinite(yhi))
    throw ConfigError("svg: non-finite values in spectrum");
  if (yhi == ylo) {
    ylo -= 1;
    yhi += 1;
  }
  const Real ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;
  const Real xspan = xhi - xlo, yspan = yhi - ylo;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) + "\" height=\"" +
         px(height) + "\" viewBox=\"0 0 " + px(width) + " " + px(height) + "\">\n";
  svg += "<rect width=\"" + px(width) + "\" height=\"" + px(height) + "\" fill=\"white\"/>\n";

  // Axes frame.
  svg += "<rect x=\"" + px(margin_l) + "\" y=\"" + px(margin_t) + "\" width=\"" +
         px(width - margin_l - margin_r) + "\" height=\"" + px(height - margin_t - margin_b) +
         "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  for (Real t : ticks(xlo, xhi)) {
    const Real x = margin_l + (t - xlo) / xspan * (width - margin_l - margin_r);
    svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(height - margin_b) + "\" x2=\"" + px(x) +
           "\" y2=\"" + px(height - margin_b + 5) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + px(x) + "\" y=\"" + px(height - margin_b + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
           format_double(t) + "</text>\n";
  }
  for (Real t : ticks(ylo, yhi)) {
    const Real y = height - margin_b - (t - ylo) / yspan * (height - margin_t - margin_b);
    svg += "<line x1=\"" + px(margin_l - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(margin_l) +
           "\" y2=\"" + px(y) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + px(margin_l - 8) + "\" y=\"" + px(y + 4) +
           "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">" +
           format_double(t) + "</text>\n";
  }

  const std::string xlabel =
      data.meta.count("x_column") ? data.meta.at("x_column") : "frequency_ghz";
  const std::string ylabel = data.meta.count("y_column") ? data.meta.at("y_column") : "intensity";
  svg += "<text x=\"" + px((margin_l + width - margin_r) / 2) + "\" y=\"" + px(height - 10) +
         "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" + xlabel +
         "</text>\n";
  svg += "<text x=\"16\" y=\"" + px((margin_t + height - margin_b) / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         px((margin_t + height - margin_b) / 2) + ")\">" + ylabel + "</text>\n";
  if (!title.empty())
    svg += "<text x=\"" + px(width / 2) + "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\""
           " font-family=\"sans-serif\">" + title + "</text>\n";

  svg += polyline(data, xlo, xspan, ylo, yspan, "#1f77b4", "");
  if (overlay)
    svg += polyline(*overlay, xlo, xspan, ylo, yspan, "#d62728", " stroke-dasharray=\"6 3\"");

  svg += "</svg>\n";
  return svg;
}

}  // namespace sivspec
