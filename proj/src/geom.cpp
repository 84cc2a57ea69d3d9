#include "lm/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lm {

double dist(const Point& a, const Point& b) { return (a - b).norm(); }

Segment::Segment(const Point& a_, const Point& b_) : a(a_), b(b_) {
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("segment with non-finite coordinates");
  if (dist(a, b) <= kEpsGeom)
    throw std::invalid_argument("degenerate segment");
}

double seg_point_dist(const Segment& seg, const Point& p) {
  const Point d = seg.b - seg.a;
  const double t = (p - seg.a).dot(d) / d.squaredNorm();
  const double tc = std::clamp(t, 0.0, 1.0);
  return dist(seg.a + tc * d, p);
}

double seg_seg_dist(const Segment& s1, const Segment& s2) {
  if (seg_seg_intersect(s1, s2).kind != IntersectKind::None) return 0.0;
  return std::min(std::min(seg_point_dist(s1, s2.a), seg_point_dist(s1, s2.b)),
                  std::min(seg_point_dist(s2, s1.a), seg_point_dist(s2, s1.b)));
}

namespace {

double cross2(const Point& a, const Point& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Scalar position of p along an unnormalized axis.
double axis_param(const Point& origin, const Point& axis, const Point& p) {
  return (p - origin).dot(axis) / axis.squaredNorm();
}

}  // namespace

IntersectResult seg_seg_intersect(const Segment& s1, const Segment& s2) {
  IntersectResult res;
  const Point d1 = s1.b - s1.a;
  const Point d2 = s2.b - s2.a;
  const double denom = cross2(d1, d2);
  const double len1 = d1.norm(), len2 = d2.norm();

  if (std::abs(denom) > kEpsGeom * len1 * len2) {
    // Non-parallel: solve s1.a + t*d1 == s2.a + u*d2.
    const Point w = s2.a - s1.a;
    const double t = cross2(w, d2) / denom;
    const double u = cross2(w, d1) / denom;
    const double tol1 = kEpsGeom / len1, tol2 = kEpsGeom / len2;
    if (t >= -tol1 && t <= 1.0 + tol1 && u >= -tol2 && u <= 1.0 + tol2) {
      res.kind = IntersectKind::Point;
      res.p0 = s1.a + std::clamp(t, 0.0, 1.0) * d1;
      res.p1 = res.p0;
    }
    return res;
  }

  // Parallel. Distinct lines cannot intersect.
  if (seg_point_dist(s1, s2.a) > kEpsGeom && seg_point_dist(s1, s2.b) > kEpsGeom)
    return res;

  // Collinear: project s2 onto s1's axis and intersect parameter ranges.
  double t0 = axis_param(s1.a, d1, s2.a);
  double t1 = axis_param(s1.a, d1, s2.b);
  if (t0 > t1) std::swap(t0, t1);
  const double lo = std::max(0.0, t0);
  const double hi = std::min(1.0, t1);
  const double tol = kEpsGeom / len1;
  if (hi < lo - tol) return res;
  const Point p0 = s1.a + std::clamp(lo, 0.0, 1.0) * d1;
  const Point p1 = s1.a + std::clamp(hi, 0.0, 1.0) * d1;
  if (dist(p0, p1) <= kEpsGeom) {
    res.kind = IntersectKind::Point;
    res.p0 = p0;
    res.p1 = p0;
  } else {
    res.kind = IntersectKind::Overlap;
    res.p0 = p0;
    res.p1 = p1;
  }
  return res;
}

Polygon::Polygon(std::vector<Point> vertices) : verts_(std::move(vertices)) {
  // Strip consecutive duplicates, including a duplicated closing vertex.
  std::vector<Point> clean;
  for (const Point& p : verts_) {
    if (!p.allFinite()) throw std::invalid_argument("polygon with non-finite vertex");
    if (clean.empty() || !points_equal(clean.back(), p)) clean.push_back(p);
  }
  while (clean.size() > 1 && points_equal(clean.front(), clean.back()))
    clean.pop_back();
  verts_ = std::move(clean);
  if (verts_.size() < 3) throw std::invalid_argument("polygon needs >= 3 vertices");

  double signed_area = 0.0;
  for (std::size_t i = 0; i < verts_.size(); ++i)
    signed_area += cross2(verts_[i], verts_[(i + 1) % verts_.size()]);
  if (std::abs(signed_area) * 0.5 <= kEpsGeom * kEpsGeom)
    throw std::invalid_argument("polygon with vanishing area");
  if (signed_area < 0.0) std::reverse(verts_.begin(), verts_.end());
}

double Polygon::area() const {
  double s = 0.0;
  for (std::size_t i = 0; i < verts_.size(); ++i)
    s += cross2(verts_[i], verts_[(i + 1) % verts_.size()]);
  return 0.5 * s;
}

bool Polygon::is_simple() const {
  const std::size_t n = verts_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Segment ei(verts_[i], verts_[(i + 1) % n]);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      const Segment ej(verts_[j], verts_[(j + 1) % n]);
      if (seg_seg_intersect(ei, ej).kind != IntersectKind::None) return false;
    }
  }
  return true;
}

std::pair<Point, Point> Polygon::bounding_box() const {
  Point lo = verts_.front(), hi = verts_.front();
  for (const Point& p : verts_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

std::optional<Polygon> Polygon::offset(double delta) const {
  const std::size_t n = verts_.size();
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& prev = verts_[(i + n - 1) % n];
    const Point& cur = verts_[i];
    const Point& next = verts_[(i + 1) % n];
    const Point d0 = (cur - prev).normalized();
    const Point d1 = (next - cur).normalized();
    // CCW polygons have the interior on the left; outward is -perp.
    const Point n0 = -perp(d0);
    const Point n1 = -perp(d1);
    const Point bis = n0 + n1;
    const double denom = bis.dot(n0);
    if (std::abs(denom) < 1e-9) {
      out.push_back(cur + delta * n0);  // straight or fully reflex corner
    } else {
      out.push_back(cur + delta / denom * bis);
    }
  }
  // An inward offset past the inradius reverses edges.
  for (std::size_t i = 0; i < n; ++i) {
    const Point d_orig = verts_[(i + 1) % n] - verts_[i];
    const Point d_off = out[(i + 1) % n] - out[i];
    if (d_off.dot(d_orig) <= kEpsGeom) return std::nullopt;
  }
  try {
    Polygon result(std::move(out));
    if (delta < 0.0 && (result.area() >= area() || !result.is_simple()))
      return std::nullopt;
    return result;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

Containment point_in_polygon(const Point& p, const Polygon& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (seg_point_dist(Segment(poly[i], poly[(i + 1) % n]), p) <= kEpsGeom)
      return Containment::Boundary;
  }
  // Ray casting toward +x.
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (x > p.x()) inside = !inside;
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

double seg_polygon_dist(const Segment& seg, const Polygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, seg_seg_dist(seg, Segment(poly[i], poly[(i + 1) % n])));
  if (point_in_polygon(seg.a, poly) == Containment::Inside) return 0.0;
  return best;
}

Ura build_segment_ura(const Segment& seg, double d_gap) {
  if (d_gap <= 0.0) throw std::invalid_argument("d_gap must be positive");
  const double r = 0.5 * d_gap;
  const Point u = seg.direction();
  const Point nrm = perp(u);
  std::vector<Point> corners = {
      seg.a - u * r - nrm * r,
      seg.b + u * r - nrm * r,
      seg.b + u * r + nrm * r,
      seg.a - u * r + nrm * r,
  };
  return Ura{Polygon(std::move(corners)), std::nullopt, seg, r};
}

Ura build_pattern_ura(const Point& foot1, const Point& foot2, double h,
                      int dir, double d_gap) {
  if (d_gap <= 0.0) throw std::invalid_argument("d_gap must be positive");
  if (h < 0.0) throw std::invalid_argument("negative pattern height");
  const Segment base(foot1, foot2);  // rejects degenerate feet
  const double r = 0.5 * d_gap;
  const Point u = base.direction();
  const Point nrm = double(dir) * perp(u);
  const double h_ob = h + r;

  std::vector<Point> outer = {
      foot1 - u * r,
      foot2 + u * r,
      foot2 + u * r + nrm * h_ob,
      foot1 - u * r + nrm * h_ob,
  };
  Ura ura{Polygon(std::move(outer)), std::nullopt, base, h_ob};

  const double span = base.length();
  if (span - d_gap > kEpsGeom && h - r > kEpsGeom) {
    std::vector<Point> inner = {
        foot1 + u * r,
        foot2 - u * r,
        foot2 - u * r + nrm * (h - r),
        foot1 + u * r + nrm * (h - r),
    };
    ura.inner = Polygon(std::move(inner));
  }
  return ura;
}

}  // namespace lm
