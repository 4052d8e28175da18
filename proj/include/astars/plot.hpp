#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "astars/csv.hpp"

namespace astars {

struct PlotOptions {
  int width = 800;
  int height = 500;
  std::string title;
};

namespace detail {

inline const char* series_colour(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % (sizeof palette / sizeof palette[0])];
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

/// SVG of median noiseless f against cumulative evaluations with a shaded
/// interquartile band per series. Summaries without noiseless values (an
/// external oracle) plot the observed values instead. The y axis is
/// logarithmic unless some plotted value is not positive.
inline std::string render_svg(const std::vector<SummarySeries>& series,
                              const PlotOptions& opt = {}) {
  std::size_t points = 0;
  for (const auto& s : series) {
    points += s.rows.size();
  }
  if (series.empty() || points == 0) {
    throw std::invalid_argument("plot: summary has no rows");
  }
  bool observed = true;
  for (const auto& s : series) {
    for (const auto& r : s.rows) {
      observed = observed && !std::isfinite(r.median_f);
    }
  }
  // rows reduced to the three plotted columns
  struct Band {
    std::size_t evals;
    double lo, mid, hi;
  };
  std::vector<std::vector<Band>> bands;
  for (const auto& s : series) {
    auto& b = bands.emplace_back();
    for (const auto& r : s.rows) {
      b.push_back(observed ? Band{r.evals, r.q25_fhat, r.median_fhat, r.q75_fhat}
                           : Band{r.evals, r.q25_f, r.median_f, r.q75_f});
    }
  }
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& b : bands) {
    for (const auto& r : b) {
      for (double y : {r.lo, r.mid, r.hi}) {
        if (std::isfinite(y)) {
          ymin = std::min(ymin, y);
          ymax = std::max(ymax, y);
        }
      }
      xmin = std::min(xmin, static_cast<double>(r.evals));
      xmax = std::max(xmax, static_cast<double>(r.evals));
    }
  }
  if (!std::isfinite(ymin)) {
    throw std::invalid_argument("plot: summary has no finite values");
  }
  const bool logy = ymin > 0.0;
  const auto ty = [logy](double y) { return logy ? std::log10(y) : y; };
  double y0 = ty(ymin);
  double y1 = ty(ymax);
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  if (xmax - xmin < 1e-12) {
    xmax = xmin + 1.0;
  }
  const double left = 80;
  const double right = opt.width - 170;
  const double top = 40;
  const double bottom = opt.height - 60;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
  const auto py = [&](double y) { return bottom - (ty(y) - y0) / (y1 - y0) * (bottom - top); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
     << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"20\" text-anchor=\"middle\">"
       << detail::xml_escape(opt.title) << "</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
     << bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double x = px(xv);
    os << "<text x=\"" << x << "\" y=\"" << bottom + 18 << "\" text-anchor=\"middle\">"
       << detail::fmt(xv) << "</text>\n";
    const double yt = y0 + (y1 - y0) * i / 4.0;
    const double y = bottom - (yt - y0) / (y1 - y0) * (bottom - top);
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << (logy ? "1e" + detail::fmt(yt) : detail::fmt(yt)) << "</text>\n";
  }
  os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << opt.height - 20
     << "\" text-anchor=\"middle\">function evaluations</text>\n";
  os << "<text x=\"20\" y=\"" << (top + bottom) / 2 << "\" transform=\"rotate(-90 20 "
     << (top + bottom) / 2 << ")\" text-anchor=\"middle\">"
     << (observed ? "median observed f" : "median f") << (logy ? " (log scale)" : "")
     << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = detail::series_colour(i);
    std::vector<const Band*> rows;
    for (const auto& r : bands[i]) {
      if (std::isfinite(r.mid) && std::isfinite(r.lo) && std::isfinite(r.hi) &&
          (!logy || r.lo > 0.0)) {
        rows.push_back(&r);
      }
    }
    if (!rows.empty()) {
      os << "<polygon class=\"iqr\" fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\" "
         << "points=\"";
      for (const auto* r : rows) {
        os << px(static_cast<double>(r->evals)) << ',' << py(r->hi) << ' ';
      }
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        os << px(static_cast<double>((*it)->evals)) << ',' << py((*it)->lo) << ' ';
      }
      os << "\"/>\n";
      os << "<polyline class=\"median\" fill=\"none\" stroke=\"" << colour
         << "\" stroke-width=\"1.5\" points=\"";
      for (const auto* r : rows) {
        os << px(static_cast<double>(r->evals)) << ',' << py(r->mid) << ' ';
      }
      os << "\"/>\n";
    }
    const double ly = top + 16 + 20.0 * static_cast<double>(i);
    os << "<line x1=\"" << right + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << right + 36
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text class=\"legend\" x=\"" << right + 42 << "\" y=\"" << ly << "\">"
       << detail::xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Reads a summary CSV and writes the SVG. Nothing is written when the CSV
/// is malformed or empty.
inline void emit_plot(const std::filesystem::path& summary_csv, const std::filesystem::path& out,
                      const PlotOptions& opt = {}) {
  std::ifstream in(summary_csv);
  if (!in) {
    throw std::runtime_error("cannot open " + summary_csv.string());
  }
  const auto series = parse_summary_csv(in);
  const std::string svg = render_svg(series, opt);
  std::ofstream os(out);
  if (!os) {
    throw std::runtime_error("cannot write " + out.string());
  }
  os << svg;
}

}  // namespace astars
