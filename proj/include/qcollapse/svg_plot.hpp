#pragma once

// Minimal static SVG 1.1 line plots with linear or logarithmic axes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qcollapse/errors.hpp"

namespace qcollapse {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label, y_label;
  bool log_x = false, log_y = false;
  int width = 720, height = 480;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
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

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int e = int(std::ceil(lo - 1e-9)); e <= int(std::floor(hi + 1e-9)); ++e) t.push_back(std::pow(10.0, e));
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }
};

inline Axis make_axis(const std::vector<PlotSeries>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log && !(v > 0.0))) continue;
      lo = std::min(lo, log ? std::log10(v) : v);
      hi = std::max(hi, log ? std::log10(v) : v);
    }
  if (!std::isfinite(lo)) throw InvalidInput("plot: no plottable points");
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.03 * (hi - lo);
  return {log, lo - pad, hi + pad};
}

}  // namespace detail

inline void write_svg(std::ostream& os, const PlotSpec& spec) {
  using detail::svg_num;
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  const detail::Axis ax = detail::make_axis(spec.series, true, spec.log_x);
  const detail::Axis ay = detail::make_axis(spec.series, false, spec.log_y);
  auto px = [&](double x) { return left + ax.frac(x) * pw; };
  auto py = [&](double y) { return top + (1.0 - ay.frac(y)) * ph; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    os << "<text x=\"" << svg_num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::svg_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\"" << svg_num(pw) << "\" height=\""
     << svg_num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ax.ticks()) {
    const double x = px(t);
    os << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(top + ph) << "\" x2=\"" << svg_num(x) << "\" y2=\""
       << svg_num(top) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(top + ph + 18) << "\" text-anchor=\"middle\">"
       << detail::tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    os << "<line x1=\"" << svg_num(left) << "\" y1=\"" << svg_num(y) << "\" x2=\"" << svg_num(left + pw)
       << "\" y2=\"" << svg_num(y) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << svg_num(left - 6) << "\" y=\"" << svg_num(y + 4) << "\" text-anchor=\"end\">"
       << detail::tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << svg_num(left + pw / 2) << "\" y=\"" << svg_num(spec.height - 15.0)
     << "\" text-anchor=\"middle\">" << detail::svg_escape(spec.x_label) << "</text>\n"
     << "<text transform=\"translate(18," << svg_num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::svg_escape(spec.y_label) << "</text>\n";

  os << "<clipPath id=\"plot-area\"><rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\""
     << svg_num(pw) << "\" height=\"" << svg_num(ph) << "\"/></clipPath>\n";
  double legend_y = top + 16;
  for (const auto& s : spec.series) {
    std::string pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if ((spec.log_x && !(s.x[k] > 0.0)) || (spec.log_y && !(s.y[k] > 0.0))) continue;
      pts += svg_num(px(s.x[k])) + "," + svg_num(py(s.y[k])) + " ";
    }
    os << "<polyline clip-path=\"url(#plot-area)\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
    if (s.markers)
      for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        if ((spec.log_x && !(s.x[k] > 0.0)) || (spec.log_y && !(s.y[k] > 0.0))) continue;
        os << "<circle cx=\"" << svg_num(px(s.x[k])) << "\" cy=\"" << svg_num(py(s.y[k])) << "\" r=\"2.5\" fill=\""
           << s.color << "\"/>\n";
      }
    if (!s.label.empty()) {
      os << "<line x1=\"" << svg_num(left + pw - 170) << "\" y1=\"" << svg_num(legend_y - 4) << "\" x2=\""
         << svg_num(left + pw - 145) << "\" y2=\"" << svg_num(legend_y - 4) << "\" stroke=\"" << s.color
         << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
         << "<text x=\"" << svg_num(left + pw - 140) << "\" y=\"" << svg_num(legend_y) << "\">"
         << detail::svg_escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
}

}  // namespace qcollapse
