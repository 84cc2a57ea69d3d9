#include "lm/render.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lm/geom.hpp"

namespace lm {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void emit_points(std::ostringstream& os, const std::vector<Point>& pts,
                 double sy, double scale) {
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) os << " ";
    os << num(pts[k].x() * scale) << "," << num((sy - pts[k].y()) * scale);
  }
}

}  // namespace

std::string render_svg(const Layout& layout, const RenderOptions& opts) {
  Point lo = Point::Constant(std::numeric_limits<double>::infinity());
  Point hi = -lo;
  const auto grow = [&](const Point& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const Dra& d : layout.dras)
    for (const Point& p : d.region.vertices()) grow(p);
  for (const Polygon& o : layout.obstacles)
    for (const Point& p : o.vertices()) grow(p);
  for (const Trace& t : layout.traces)
    for (const Point& p : t.nodes) grow(p);
  if (!lo.allFinite()) {
    lo = Point::Zero();
    hi = Point(1, 1);
  }
  const double s = opts.scale;
  const double margin = 0.02 * (hi - lo).norm() + 1.0;
  const double sy = hi.y() + lo.y();  // vertical flip axis

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\""
     << num((lo.x() - margin) * s) << " " << num((lo.y() - margin) * s) << " "
     << num((hi.x() - lo.x() + 2 * margin) * s) << " "
     << num((hi.y() - lo.y() + 2 * margin) * s) << "\">\n";

  for (const Dra& d : layout.dras) {
    os << " <polygon class=\"dra\" points=\"";
    emit_points(os, d.region.vertices(), sy, s);
    os << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"" << num(0.2 * s)
       << "\"/>\n";
  }
  for (const auto& [id, polys] : layout.routable_areas) {
    for (const Polygon& poly : polys) {
      os << " <polygon class=\"area\" points=\"";
      emit_points(os, poly.vertices(), sy, s);
      os << "\" fill=\"none\" stroke=\"#88bb88\" stroke-dasharray=\"2,1\" "
            "stroke-width=\""
         << num(0.15 * s) << "\"/>\n";
    }
  }
  for (const Polygon& o : layout.obstacles) {
    os << " <polygon class=\"obstacle\" points=\"";
    emit_points(os, o.vertices(), sy, s);
    os << "\" fill=\"#777777\"/>\n";
  }
  if (opts.ura_overlay) {
    for (const Trace& t : layout.traces) {
      const double d_gap = layout.dra_at(t.nodes.front()).rules.d_gap;
      for (std::size_t k = 0; k + 1 < t.nodes.size(); ++k) {
        const Ura ura =
            build_segment_ura(Segment(t.nodes[k], t.nodes[k + 1]), d_gap + t.width);
        os << " <polygon class=\"ura\" points=\"";
        emit_points(os, ura.outer.vertices(), sy, s);
        os << "\" fill=\"none\" stroke=\"#ddaa00\" stroke-width=\"" << num(0.05 * s)
           << "\"/>\n";
      }
    }
  }
  for (const Trace& t : layout.traces) {
    const char* color = "#444444";
    for (std::size_t g = 0; g < layout.groups.size(); ++g) {
      for (int m : layout.groups[g].members) {
        bool mine = m == t.id;
        if (const DifferentialPair* p = layout.find_pair(m))
          mine = mine || p->trace_p == t.id || p->trace_n == t.id;
        if (mine) color = kPalette[g % 8];
      }
    }
    os << " <polyline class=\"trace\" points=\"";
    emit_points(os, t.nodes, sy, s);
    os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << num(t.width * s) << "\" stroke-linejoin=\"miter\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void render_svg_file(const Layout& layout, const std::string& path,
                     const RenderOptions& opts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write render file: " + path);
  out << render_svg(layout, opts);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lm
