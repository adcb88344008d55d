#pragma once

// Self-contained SVG charts. Output depends only on the input numbers: no
// timestamps, no external fonts beyond generic families.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace advbot::svg {

struct Series {
  std::string name;
  std::vector<double> y;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
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

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

inline void header(std::ostringstream& os, int w, int h, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">"
     << xml_escape(title) << "</text>\n";
}

}  // namespace detail

// One panel per series, stacked vertically; each panel scaled independently.
inline std::string line_panels(const std::string& title, const std::string& x_label,
                               const std::vector<Series>& series) {
  const int w = 640, panel_h = 160, top = 28, left = 60, right = 20;
  const int h = top + static_cast<int>(series.size()) * (panel_h + 20) + 20;
  std::ostringstream os;
  detail::header(os, w, h, title);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ys = series[s].y;
    const int y0 = top + static_cast<int>(s) * (panel_h + 20);
    const int plot_w = w - left - right, plot_h = panel_h - 30;
    os << "<g>\n<text x=\"" << left << "\" y=\"" << y0 + 10 << "\">"
       << detail::xml_escape(series[s].name) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << y0 + 15 << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
    if (!ys.empty()) {
      double lo = *std::min_element(ys.begin(), ys.end());
      double hi = *std::max_element(ys.begin(), ys.end());
      if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
      }
      const double n = ys.size() > 1 ? static_cast<double>(ys.size() - 1) : 1.0;
      os << "<polyline fill=\"none\" stroke=\"" << detail::palette(s) << "\" points=\"";
      for (std::size_t i = 0; i < ys.size(); ++i) {
        const double px = left + plot_w * (static_cast<double>(i) / n);
        const double py = y0 + 15 + plot_h * (1.0 - (ys[i] - lo) / (hi - lo));
        os << (i ? " " : "") << detail::num(px) << ',' << detail::num(py);
      }
      os << "\"/>\n";
      os << "<text x=\"" << left - 4 << "\" y=\"" << y0 + 24 << "\" text-anchor=\"end\">"
         << detail::num(hi) << "</text>\n";
      os << "<text x=\"" << left - 4 << "\" y=\"" << y0 + 15 + plot_h
         << "\" text-anchor=\"end\">" << detail::num(lo) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << y0 + panel_h
       << "\" text-anchor=\"middle\">" << detail::xml_escape(x_label) << "</text>\n</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

struct BarGroup {
  std::string name;
  std::vector<double> values;
};

// Grouped bars over shared category labels (e.g. histogram bins or features).
inline std::string grouped_bars(const std::string& title, const std::vector<std::string>& categories,
                                const std::vector<BarGroup>& groups, bool horizontal_labels = false) {
  const int w = 720, h = 360, top = 30, left = 60, bottom = horizontal_labels ? 40 : 110;
  const int plot_w = w - left - 20, plot_h = h - top - bottom;
  double hi = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) hi = std::max(hi, std::abs(v));
  }
  if (hi <= 0.0) hi = 1.0;
  std::ostringstream os;
  detail::header(os, w, h, title);
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
     << plot_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
  const double slot = categories.empty() ? 0.0 : static_cast<double>(plot_w) / categories.size();
  const double bar = groups.empty() ? 0.0 : slot * 0.8 / groups.size();
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t c = 0; c < categories.size() && c < groups[gi].values.size(); ++c) {
      const double v = std::abs(groups[gi].values[c]);
      const double bh = plot_h * v / hi;
      const double x = left + slot * c + slot * 0.1 + bar * gi;
      os << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(top + plot_h - bh)
         << "\" width=\"" << detail::num(bar) << "\" height=\"" << detail::num(bh)
         << "\" fill=\"" << detail::palette(gi) << "\" fill-opacity=\"0.8\"/>\n";
    }
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x = left + slot * (c + 0.5);
    const double y = top + plot_h + 12;
    if (horizontal_labels) {
      os << "<text x=\"" << detail::num(x) << "\" y=\"" << detail::num(y)
         << "\" text-anchor=\"middle\">" << detail::xml_escape(categories[c]) << "</text>\n";
    } else {
      os << "<text x=\"" << detail::num(x) << "\" y=\"" << detail::num(y)
         << "\" text-anchor=\"end\" transform=\"rotate(-60 " << detail::num(x) << ' '
         << detail::num(y) << ")\">" << detail::xml_escape(categories[c]) << "</text>\n";
    }
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    os << "<text x=\"" << w - 150 << "\" y=\"" << top + 14 * (gi + 1) << "\" fill=\""
       << detail::palette(gi) << "\">" << detail::xml_escape(groups[gi].name) << "</text>\n";
  }
  os << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">"
     << detail::num(hi) << "</text>\n</svg>\n";
  return os.str();
}

// Square matrix heatmap with values in [0, 1].
inline std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<double>>& values) {
  const int cell = 70, left = 140, top = 40;
  const int w = left + cell * static_cast<int>(col_labels.size()) + 20;
  const int h = top + cell * static_cast<int>(row_labels.size()) + 60;
  std::ostringstream os;
  detail::header(os, w, h, title);
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + cell * r + cell / 2
       << "\" text-anchor=\"end\">" << detail::xml_escape(row_labels[r]) << "</text>\n";
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const double v = values[r][c];
      const bool valid = std::isfinite(v);
      const int shade = valid ? static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(v, 0.0, 1.0))))
                              : 200;
      char fill[16];
      std::snprintf(fill, sizeof(fill), "#%02x%02xff", shade, shade);
      os << "<rect x=\"" << left + cell * c << "\" y=\"" << top + cell * r << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << (valid ? fill : "#cccccc")
         << "\" stroke=\"white\"/>\n";
      os << "<text x=\"" << left + cell * c + cell / 2 << "\" y=\"" << top + cell * r + cell / 2
         << "\" text-anchor=\"middle\">" << (valid ? detail::num(v) : std::string("n/a"))
         << "</text>\n";
    }
  }
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    os << "<text x=\"" << left + cell * c + cell / 2 << "\" y=\""
       << top + cell * row_labels.size() + 16 << "\" text-anchor=\"middle\">"
       << detail::xml_escape(col_labels[c]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace advbot::svg
