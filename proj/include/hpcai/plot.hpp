#pragma once

// Roofline charts: a CSV series over log-spaced COI and a standalone SVG
// log-log chart (no external fonts or scripts).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "hpcai/roofline.hpp"

namespace hpcai::roofline {

inline constexpr int kPlotSamples = 256;
inline constexpr double kSvgWidth = 960.0;
inline constexpr double kSvgHeight = 540.0;

struct PlotArtifact {
  std::string csv;
  std::string svg;
};

/// COI axis span: [1, 10 * ridge], so the kink is always visible.
inline std::pair<double, double> coi_span(const RooflineModel& model) {
  const double ridge = ridge_point(model);
  return {1.0, std::max(10.0 * ridge, 10.0)};
}

inline std::vector<double> log_samples(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace detail {

inline std::string num(double v, int precision = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline double bound_for_ceiling(const RooflineModel& m, const Ceiling& c, double x) {
  return c.kind == CeilingKind::COMPUTATION ? attained_bound(m, x, c.name, kPeak)
                                            : attained_bound(m, x, kPeak, c.name);
}

// Log-log mapping from data space to the SVG viewport.
struct Axes {
  double x_lo, x_hi, y_lo, y_hi;
  double left = 90, right = 930, top = 40, bottom = 480;

  double px(double coi_value) const {
    return left + (std::log10(coi_value) - std::log10(x_lo)) / (std::log10(x_hi) - std::log10(x_lo)) * (right - left);
  }
  double py(double flops) const {
    return bottom - (std::log10(flops) - std::log10(y_lo)) / (std::log10(y_hi) - std::log10(y_lo)) * (bottom - top);
  }
};

/// Vertices of min(flat, band * x) over [lo, hi], including the exact kink.
inline std::vector<std::pair<double, double>> roof_vertices(double flat, double band, double lo, double hi) {
  std::vector<std::pair<double, double>> v;
  v.emplace_back(lo, std::min(flat, band * lo));
  const double kink = flat / band;
  if (kink > lo && kink < hi) v.emplace_back(kink, flat);
  v.emplace_back(hi, std::min(flat, band * hi));
  return v;
}

inline std::string polyline(const Axes& ax, const std::vector<std::pair<double, double>>& v) {
  std::string pts;
  for (const auto& [x, y] : v) {
    if (!pts.empty()) pts += ' ';
    pts += fixed(ax.px(x)) + "," + fixed(ax.py(y));
  }
  return pts;
}

}  // namespace detail

/// Header: coi,bound_flops[,ceiling_<name>...]
inline std::string export_csv(const RooflineModel& model) {
  if (model.empty()) throw Error(ErrorKind::NothingToPlot, "model has no peaks");
  const auto [lo, hi] = coi_span(model);
  std::ostringstream out;
  out << "coi,bound_flops";
  for (const auto& c : model.ceilings) out << ",ceiling_" << c.name;
  out << "\n";
  for (double x : log_samples(lo, hi, kPlotSamples)) {
    out << detail::num(x) << "," << detail::num(attained_bound(model, x));
    for (const auto& c : model.ceilings) out << "," << detail::num(detail::bound_for_ceiling(model, c, x));
    out << "\n";
  }
  return out.str();
}

/// Points are coloured by their bound under the selected ceiling pair.
inline std::string export_svg(const RooflineModel& model, const std::vector<RooflinePoint>& points,
                              std::string_view compute_ceiling = kPeak, std::string_view comm_ceiling = kPeak) {
  if (model.empty()) throw Error(ErrorKind::NothingToPlot, "model has no peaks");
  auto [x_lo, x_hi] = coi_span(model);
  for (const auto& p : points) {
    if (std::isfinite(p.coi) && p.coi > 0.0) {
      x_lo = std::min(x_lo, p.coi / 2.0);
      x_hi = std::max(x_hi, p.coi * 2.0);
    }
  }
  double y_hi = model.peak_flops;
  double y_lo = std::min(model.peak_flops, model.peak_band * x_lo);
  for (const auto& c : model.ceilings) {
    y_lo = std::min(y_lo, detail::bound_for_ceiling(model, c, x_lo));
    y_hi = std::max(y_hi, detail::bound_for_ceiling(model, c, x_hi));
  }
  for (const auto& p : points) {
    if (p.attained && *p.attained > 0.0) {
      y_lo = std::min(y_lo, *p.attained);
      y_hi = std::max(y_hi, *p.attained);
    }
  }
  const detail::Axes ax{x_lo, x_hi, y_lo / 2.0, y_hi * 2.0};
  const double ridge = ridge_point(model);

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" width=\"960\" height=\"540\""
    << " data-x-min=\"" << detail::num(ax.x_lo, 17) << "\" data-x-max=\"" << detail::num(ax.x_hi, 17) << "\""
    << " data-y-min=\"" << detail::num(ax.y_lo, 17) << "\" data-y-max=\"" << detail::num(ax.y_hi, 17) << "\">\n";
  s << "<rect width=\"960\" height=\"540\" fill=\"white\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";

  // Decade grid and tick labels.
  for (int e = static_cast<int>(std::ceil(std::log10(ax.x_lo))); e <= std::floor(std::log10(ax.x_hi)); ++e) {
    const double x = ax.px(std::pow(10.0, e));
    s << "<line class=\"grid\" x1=\"" << detail::fixed(x) << "\" y1=\"" << ax.top << "\" x2=\"" << detail::fixed(x)
      << "\" y2=\"" << ax.bottom << "\" stroke=\"#e0e0e0\"/>\n";
    s << "<text x=\"" << detail::fixed(x) << "\" y=\"" << ax.bottom + 18 << "\" text-anchor=\"middle\">1e" << e
      << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(std::log10(ax.y_lo))); e <= std::floor(std::log10(ax.y_hi)); ++e) {
    const double y = ax.py(std::pow(10.0, e));
    s << "<line class=\"grid\" x1=\"" << ax.left << "\" y1=\"" << detail::fixed(y) << "\" x2=\"" << ax.right
      << "\" y2=\"" << detail::fixed(y) << "\" stroke=\"#e0e0e0\"/>\n";
    s << "<text x=\"" << ax.left - 6 << "\" y=\"" << detail::fixed(y + 4) << "\" text-anchor=\"end\">1e" << e
      << "</text>\n";
  }
  s << "<rect x=\"" << ax.left << "\" y=\"" << ax.top << "\" width=\"" << ax.right - ax.left << "\" height=\""
    << ax.bottom - ax.top << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (ax.left + ax.right) / 2 << "\" y=\"" << ax.bottom + 40
    << "\" text-anchor=\"middle\">COI (FLOPs/byte)</text>\n";
  s << "<text x=\"20\" y=\"" << (ax.top + ax.bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << (ax.top + ax.bottom) / 2 << ")\">Attainable FLOPS</text>\n";
  s << "<text x=\"" << ax.left << "\" y=\"24\" font-size=\"14\">" << to_string(model.mode) << " roofline ("
    << hpcai::to_string(model.precision) << ")</text>\n";

  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::size_t colour = 0;
  for (const auto& c : model.ceilings) {
    const double flat = c.kind == CeilingKind::COMPUTATION ? c.value : model.peak_flops;
    const double band = c.kind == CeilingKind::COMPUTATION ? model.peak_band : c.value;
    const auto verts = detail::roof_vertices(flat, band, ax.x_lo, ax.x_hi);
    s << "<polyline class=\"ceiling\" data-name=\"" << detail::xml_escape(c.name) << "\" points=\""
      << detail::polyline(ax, verts) << "\" fill=\"none\" stroke=\"" << kPalette[colour++ % 7]
      << "\" stroke-dasharray=\"6 4\"/>\n";
    s << "<text x=\"" << detail::fixed(ax.right - 4) << "\" y=\"" << detail::fixed(ax.py(verts.back().second) - 4)
      << "\" text-anchor=\"end\" font-size=\"10\">" << detail::xml_escape(c.name) << "</text>\n";
  }

  const auto roof = detail::roof_vertices(model.peak_flops, model.peak_band, ax.x_lo, ax.x_hi);
  s << "<polyline class=\"roof\" data-ridge-coi=\"" << detail::num(ridge, 17) << "\" points=\""
    << detail::polyline(ax, roof) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";

  for (const auto& p : points) {
    const double x = std::isfinite(p.coi) ? p.coi : ax.x_hi;
    const double bound = attained_bound(model, p.coi, compute_ceiling, comm_ceiling);
    const double y = p.attained && *p.attained > 0.0 ? *p.attained : bound;
    const bool comm = classify_under(model, p, compute_ceiling, comm_ceiling) == Bound::COMMUNICATION_BOUND;
    s << "<circle class=\"point\" data-label=\"" << detail::xml_escape(p.label) << "\" data-bound=\""
      << to_string(comm ? Bound::COMMUNICATION_BOUND : Bound::COMPUTE_BOUND) << "\" cx=\"" << detail::fixed(ax.px(x))
      << "\" cy=\"" << detail::fixed(ax.py(y)) << "\" r=\"5\" fill=\"" << (comm ? "#1f77b4" : "#d62728")
      << "\"><title>" << detail::xml_escape(p.label) << "</title></circle>\n";
    s << "<text x=\"" << detail::fixed(ax.px(x) + 7) << "\" y=\"" << detail::fixed(ax.py(y) - 7)
      << "\" font-size=\"10\">" << detail::xml_escape(p.label) << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

inline PlotArtifact export_plot(const RooflineModel& model, const std::vector<RooflinePoint>& points) {
  return {export_csv(model), export_svg(model, points)};
}

}  // namespace hpcai::roofline
