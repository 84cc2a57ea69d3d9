#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

// 2D geometry kernel for the length-matching engine. Coordinates are
// nanometer-scaled doubles; all predicates use the absolute tolerance
// kEpsGeom so that any-direction (non-grid) inputs behave consistently.
namespace lm {

using Point = Eigen::Vector2d;

inline constexpr double kEpsGeom = 1e-6;

double dist(const Point& a, const Point& b);

inline Point perp(const Point& v) { return Point(-v.y(), v.x()); }

inline bool points_equal(const Point& a, const Point& b) {
  return dist(a, b) <= kEpsGeom;
}

// Closed segment. Degenerate (length <= kEpsGeom) segments are rejected.
struct Segment {
  Point a;
  Point b;

  Segment(const Point& a_, const Point& b_);

  double length() const { return dist(a, b); }
  Point direction() const { return (b - a).normalized(); }
};

double seg_point_dist(const Segment& seg, const Point& p);
double seg_seg_dist(const Segment& s1, const Segment& s2);

enum class IntersectKind { None, Point, Overlap };

struct IntersectResult {
  IntersectKind kind = IntersectKind::None;
  Point p0 = Point::Zero();  // valid for Point and Overlap
  Point p1 = Point::Zero();  // second endpoint of a collinear overlap
};

IntersectResult seg_seg_intersect(const Segment& s1, const Segment& s2);

enum class Containment { Inside, Boundary, Outside };

// Simple polygon, stored counterclockwise (constructor normalizes the
// orientation and strips consecutive duplicate vertices).
class Polygon {
 public:
  Polygon() = default;  // empty placeholder; real polygons have >= 3 vertices
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return verts_; }
  std::size_t size() const { return verts_.size(); }
  const Point& operator[](std::size_t i) const { return verts_[i]; }

  double area() const;
  bool is_simple() const;

  // Axis-aligned bounding box as (min, max).
  std::pair<Point, Point> bounding_box() const;

  // Mitered offset: positive delta grows, negative shrinks. Returns
  // nullopt when a negative offset degenerates the polygon.
  std::optional<Polygon> offset(double delta) const;

 private:
  std::vector<Point> verts_;
};

Containment point_in_polygon(const Point& p, const Polygon& poly);

double seg_polygon_dist(const Segment& seg, const Polygon& poly);

// Clearance envelope around a segment or a convex pattern. The outer
// border is the rectangle ABCD at clearance/2 from the generating
// geometry; a pattern additionally carries the inner border EFGH (the
// notch between the two sides) when it exists. `base` is the generating
// chord and `h_ob` the height of the outer border above it.
struct Ura {
  Polygon outer;
  std::optional<Polygon> inner;
  Segment base;
  double h_ob = 0.0;
};

// Rectangle at d_gap/2 around `seg`, extended past both endpoints.
Ura build_segment_ura(const Segment& seg, double d_gap);

// Union envelope of the three segments of a convex pattern with the
// given feet, height and direction (+1 = left of foot1->foot2, -1 =
// right). The region below the foot chord is not represented; it is
// covered by the URA of the segment the pattern extends.
Ura build_pattern_ura(const Point& foot1, const Point& foot2, double h,
                      int dir, double d_gap);

}  // namespace lm
