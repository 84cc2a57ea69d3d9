#pragma once

#include <cstdint>
#include <vector>

#include "lm/geom.hpp"

namespace lm {

struct IndexedPoint {
  Point p;
  int polygon_id = -1;
  int vertex_id = -1;
};

// Static segment tree over the abscissa ranks of the indexed points.
// Every tree node keeps its points sorted by ordinate, so a rectangular
// query decomposes into O(log N) nodes plus two binary searches each.
// Rebuilt whenever the obstacle/URA environment changes; queries on a
// built index are read-only and thread-safe.
class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(std::vector<IndexedPoint> points);

  std::vector<IndexedPoint> range_query(double x_lo, double x_hi,
                                        double y_lo, double y_hi) const;

  std::size_t stored_entries() const { return stored_entries_; }
  std::size_t size() const { return pts_.size(); }

  // Tree nodes touched by the most recent query (for complexity tests).
  std::size_t last_visited_nodes() const { return last_visited_; }

 private:
  void collect(std::size_t node, std::size_t lo, std::size_t hi,
               std::size_t qlo, std::size_t qhi, double y_lo, double y_hi,
               std::vector<IndexedPoint>& out) const;

  std::vector<IndexedPoint> pts_;         // sorted by x
  std::vector<std::vector<int>> node_pts_;  // per tree node, y-sorted ids
  std::size_t stored_entries_ = 0;
  mutable std::size_t last_visited_ = 0;
};

PointIndex build_index(const std::vector<std::pair<Point, int>>& points);

}  // namespace lm
