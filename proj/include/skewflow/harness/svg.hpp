#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "skewflow/harness/csv.hpp"

namespace skewflow::harness {

namespace detail {

inline std::string fixed2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  static Range of(const std::vector<const std::vector<double>*>& series) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* s : series)
      for (double v : *s)
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
    if (!std::isfinite(lo)) return {0.0, 1.0};
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(0.5, 0.05 * std::abs(hi));
      return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
  }
};

struct Panel {
  double left, top, width, height;
  Range xr, yr;

  double px(double v) const { return left + (v - xr.lo) / (xr.hi - xr.lo) * width; }
  double py(double v) const { return top + height - (v - yr.lo) / (yr.hi - yr.lo) * height; }

  void frame(std::ostream& out, const std::string& title, const std::string& xlabel,
             const std::string& ylabel) const {
    out << "<rect x=\"" << fixed2(left) << "\" y=\"" << fixed2(top) << "\" width=\""
        << fixed2(width) << "\" height=\"" << fixed2(height)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fixed2(left + width / 2) << "\" y=\"" << fixed2(top - 8)
        << "\" text-anchor=\"middle\">" << title << "</text>\n";
    out << "<text x=\"" << fixed2(left + width / 2) << "\" y=\"" << fixed2(top + height + 32)
        << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    out << "<text x=\"" << fixed2(left - 46) << "\" y=\"" << fixed2(top + height / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << fixed2(left - 46) << ' '
        << fixed2(top + height / 2) << ")\">" << ylabel << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
      const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
      out << "<text x=\"" << fixed2(px(xv)) << "\" y=\"" << fixed2(top + height + 14)
          << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
      out << "<text x=\"" << fixed2(left - 4) << "\" y=\"" << fixed2(py(yv) + 4)
          << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
  }

  void polyline(std::ostream& out, const std::vector<double>& xs, const std::vector<double>& ys,
                const char* color) const {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      out << (first ? "" : " ") << fixed2(px(xs[i])) << ',' << fixed2(py(ys[i]));
      first = false;
    }
    out << "\"/>\n";
    if (xs.size() == 1 && std::isfinite(xs[0]) && std::isfinite(ys[0])) {
      out << "<circle cx=\"" << fixed2(px(xs[0])) << "\" cy=\"" << fixed2(py(ys[0]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }
};

}  // namespace detail

/// Two-panel figure on a fixed 800×400 canvas: the dual trajectory
/// (x_0, y_0) on the left, energy and modified energy against the step on
/// the right. Output depends only on the table contents.
inline void write_svg(std::ostream& out, const CsvTable& table, const std::string& title = "") {
  const std::vector<double> step = table.column("step");
  const std::vector<double> x = table.column("x_0");
  const std::vector<double> y = table.column("y_0");
  const std::vector<double> h = table.column("energy");
  const std::vector<double> hm = table.column("modified_energy");

  const detail::Panel left{70, 40, 300, 300, detail::Range::of({&x}), detail::Range::of({&y})};
  const detail::Panel right{480, 40, 300, 300, detail::Range::of({&step}),
                            detail::Range::of({&h, &hm})};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" "
         "viewBox=\"0 0 800 400\" font-family=\"sans-serif\" font-size=\"12px\">\n";
  out << "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"400\" y=\"16\" text-anchor=\"middle\">" << title << "</text>\n";
  }
  left.frame(out, "trajectory", "x_0", "y_0");
  left.polyline(out, x, y, "#1f77b4");
  right.frame(out, "energy", "step", "value");
  right.polyline(out, step, h, "#d62728");
  right.polyline(out, step, hm, "#2ca02c");
  out << "<text x=\"700\" y=\"60\" fill=\"#d62728\">H</text>\n";
  out << "<text x=\"700\" y=\"76\" fill=\"#2ca02c\">H_eta</text>\n";
  out << "</svg>\n";
}

}  // namespace skewflow::harness
