#ifndef CSOPT_TOOLS_SVG_PLOT_HPP
#define CSOPT_TOOLS_SVG_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "csopt/core.hpp"

namespace csopt {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

namespace detail_svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step;
       v += step)
    t.push_back(v);
  return t;
}

}  // namespace detail_svg

/// Deterministic standalone SVG line plot; no external renderer needed.
inline void write_svg_plot(const std::string& path,
                           const std::vector<PlotSeries>& series,
                           const PlotOptions& opt) {
  if (series.empty()) throw error("write_svg_plot: no series");
  const double W = 860, H = 520, ml = 80, mr = 180, mt = 46, mb = 56;
  auto txx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
  auto txy = [&](double v) { return opt.log_y ? std::log10(v) : v; };

  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw error("write_svg_plot: bad series '" + s.label + "'");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((opt.log_x && s.x[i] <= 0) || (opt.log_y && s.y[i] <= 0))
        throw error("write_svg_plot: nonpositive value on a log axis in '" +
                    s.label + "'");
      xlo = std::min(xlo, txx(s.x[i]));
      xhi = std::max(xhi, txx(s.x[i]));
      ylo = std::min(ylo, txy(s.y[i]));
      yhi = std::max(yhi, txy(s.y[i]));
    }
  }
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) {
    yhi = ylo + (std::abs(ylo) > 0 ? std::abs(ylo) * 0.1 : 1.0);
    ylo -= (yhi - ylo);
  }
  const double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  auto px = [&](double v) {
    return ml + (txx(v) - xlo) / (xhi - xlo) * (W - ml - mr);
  };
  auto py = [&](double v) {
    return H - mb - (txy(v) - ylo) / (yhi - ylo) * (H - mt - mb);
  };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open SVG output: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W
      << " " << H << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"24\" "
      << "text-anchor=\"middle\" font-size=\"16\">" << opt.title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << (H - mb) << "\" x2=\"" << (W - mr)
      << "\" y2=\"" << (H - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << (H - mb) << "\" stroke=\"black\"/>\n";
  for (double t : detail_svg::nice_ticks(xlo, xhi)) {
    const double gx = ml + (t - xlo) / (xhi - xlo) * (W - ml - mr);
    out << "<line x1=\"" << gx << "\" y1=\"" << (H - mb) << "\" x2=\"" << gx
        << "\" y2=\"" << (H - mb + 5) << "\" stroke=\"black\"/>\n";
    const std::string lab =
        opt.log_x ? ("1e" + detail_svg::num(t)) : detail_svg::num(t);
    out << "<text x=\"" << gx << "\" y=\"" << (H - mb + 20)
        << "\" text-anchor=\"middle\">" << lab << "</text>\n";
  }
  for (double t : detail_svg::nice_ticks(ylo, yhi)) {
    const double gy = H - mb - (t - ylo) / (yhi - ylo) * (H - mt - mb);
    out << "<line x1=\"" << (ml - 5) << "\" y1=\"" << gy << "\" x2=\"" << ml
        << "\" y2=\"" << gy << "\" stroke=\"black\"/>\n";
    const std::string lab =
        opt.log_y ? ("1e" + detail_svg::num(t)) : detail_svg::num(t);
    out << "<text x=\"" << (ml - 8) << "\" y=\"" << (gy + 4)
        << "\" text-anchor=\"end\">" << lab << "</text>\n";
  }
  out << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"" << (H - 14)
      << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  out << "<text x=\"20\" y=\"" << (mt + (H - mt - mb) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (mt + (H - mt - mb) / 2) << ")\">" << opt.y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      out << detail_svg::num(px(series[k].x[i])) << ","
          << detail_svg::num(py(series[k].y[i])) << " ";
    out << "\"/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(k);
    out << "<line x1=\"" << (W - mr + 10) << "\" y1=\"" << ly << "\" x2=\""
        << (W - mr + 34) << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << (W - mr + 40) << "\" y=\"" << (ly + 4) << "\">"
        << series[k].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace csopt

#endif  // CSOPT_TOOLS_SVG_PLOT_HPP
