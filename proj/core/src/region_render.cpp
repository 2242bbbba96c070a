#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "xpl/csv.hpp"
#include "xpl/errors.hpp"
#include "xpl/regions.hpp"

namespace xpl {

namespace {

std::string fixed3(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  return std::string(buf, r.ptr);
}

const char* layer_color(int layer) {
  static const char* palette[] = {"#000000", "#1a9641", "#7b3294", "#d7191c", "#2c7bb6", "#fdae61"};
  if (layer < 0) return "#999999";
  return palette[static_cast<std::size_t>(layer) % 6];
}

const char* fill_color(std::size_t i) {
  static const char* palette[] = {"#f7f7f7", "#e8eef7", "#f7ede8", "#eaf5e9", "#f3eaf5", "#f5f3e6"};
  return palette[i % 6];
}

}  // namespace

std::string regions_svg(const std::vector<RegionCell>& cells, const Box2& box, const RegionStyle& style) {
  const double w = style.width_px;
  const double h = w * (box.y1 - box.y0) / (box.x1 - box.x0);
  auto px = [&](const Point2& p) {
    return fixed3((p.x() - box.x0) / (box.x1 - box.x0) * w) + "," +
           fixed3((box.y1 - p.y()) / (box.y1 - box.y0) * h);
  };
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed3(w) << "\" height=\"" << fixed3(h)
     << "\" viewBox=\"0 0 " << fixed3(w) << ' ' << fixed3(h) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << fixed3(w) << "\" height=\"" << fixed3(h)
     << "\" fill=\"#ffffff\"/>\n";
  if (style.fill_cells) {
    os << "<g stroke=\"none\">\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << "<polygon points=\"";
      for (std::size_t j = 0; j < cells[i].polygon.size(); ++j) os << (j ? " " : "") << px(cells[i].polygon[j]);
      os << "\" fill=\"" << fill_color(i) << "\"/>\n";
    }
    os << "</g>\n";
  }
  int max_layer = -1;
  for (const auto& c : cells)
    for (const auto& e : c.edges) max_layer = std::max(max_layer, e.layer);
  for (int layer = -1; layer <= max_layer; ++layer) {
    os << "<g stroke=\"" << layer_color(layer) << "\" stroke-width=\"" << fixed3(style.stroke_width)
       << "\" fill=\"none\">\n";
    for (const auto& c : cells) {
      const std::size_t n = c.polygon.size();
      for (std::size_t j = 0; j < n; ++j) {
        if (c.edges[j].layer != layer) continue;
        os << "<polyline points=\"" << px(c.polygon[j]) << ' ' << px(c.polygon[(j + 1) % n]) << "\"/>\n";
      }
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void render_regions_svg(const std::vector<RegionCell>& cells, const Box2& box, const RegionStyle& style,
                        const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << regions_svg(cells, box, style);
  if (!f) throw IoError("failed writing '" + path + "'");
}

void write_cells_csv(std::ostream& os, const std::vector<RegionCell>& cells) {
  os << "cell_id,area,pattern,depth_introduced_edges\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string edges;
    for (std::size_t j = 0; j < cells[i].edges.size(); ++j) {
      if (j) edges += ';';
      const int l = cells[i].edges[j].layer;
      edges += l < 0 ? std::string("box") : std::to_string(l + 1);
    }
    csv_row(os, i, cells[i].area, cells[i].pattern.to_string(), edges);
  }
}

}  // namespace xpl
