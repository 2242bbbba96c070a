#include "xplab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "xpl/errors.hpp"

namespace xplab {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

bool usable(double x, double y, bool log_y) { return std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0.0); }

}  // namespace

std::string plot_svg(const std::vector<Series>& series, const AxesSpec& axes) {
  const double W = axes.width_px, H = axes.height_px;
  const double left = 70, right = 150, top = 36, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  Range xr, yr;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i], axes.log_y)) {
        xr.add(s.x[i]);
        yr.add(axes.log_y ? std::log10(s.y[i]) : s.y[i]);
      }
  if (xr.empty()) xr = {0.0, 1.0};
  if (yr.empty()) yr = {0.0, 1.0};
  if (xr.lo == xr.hi) xr = {xr.lo - 0.5, xr.hi + 0.5};
  if (yr.lo == yr.hi) yr = {yr.lo - 0.5, yr.hi + 0.5};
  if (axes.log_y) yr = {std::floor(yr.lo), std::ceil(yr.hi)};

  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) {
    const double v = axes.log_y ? std::log10(y) : y;
    return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
     << "\" viewBox=\"0 0 " << num(W) << ' ' << num(H) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(W) << "\" height=\"" << num(H) << "\" fill=\"#ffffff\"/>\n";
  if (!axes.title.empty())
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(axes.title) << "</text>\n";

  os << "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
     << num(top + ph) << "\"/>\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
     << num(top + ph) << "\"/>\n";
  os << "</g>\n";

  os << "<g font-size=\"11\" fill=\"#000000\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double x = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    os << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(x)) << "\" y2=\""
       << num(top + ph + 4) << "\" stroke=\"#000000\"/>\n";
    os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top + ph + 17) << "\" text-anchor=\"middle\">"
       << tick_label(x) << "</text>\n";
  }
  const int ny = axes.log_y ? static_cast<int>(yr.hi - yr.lo) : 5;
  for (int i = 0; i <= ny; ++i) {
    const double v = yr.lo + (yr.hi - yr.lo) * i / ny;
    const double y = top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph;
    os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\"" << num(y)
       << "\" stroke=\"#000000\"/>\n";
    os << "<text x=\"" << num(left - 7) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
       << (axes.log_y ? "1e" + tick_label(v) : tick_label(v)) << "</text>\n";
  }
  os << "</g>\n";
  if (!axes.x_label.empty())
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 10) << "\" text-anchor=\"middle\" font-size=\"12\">"
       << escape(axes.x_label) << "</text>\n";
  if (!axes.y_label.empty())
    os << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << num(top + ph / 2) << ")\">" << escape(axes.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i], axes.log_y)) pts.emplace_back(px(s.x[i]), py(s.y[i]));
    os << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    if (pts.size() >= 2) {
      os << "<polyline fill=\"none\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
      os << "\"/>\n";
    }
    for (const auto& [x, y] : pts) os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"2.5\"/>\n";
    const double ly = top + 10 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 30) << "\" y2=\""
       << num(ly) << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(left + pw + 35) << "\" y=\"" << num(ly + 4) << "\" stroke=\"none\" font-size=\"11\">"
       << escape(s.label) << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::vector<Series>& series, const AxesSpec& axes, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw xpl::IoError("cannot open " + path + " for writing");
  f << plot_svg(series, axes);
  if (!f) throw xpl::IoError("write failed: " + path);
}

}  // namespace xplab
