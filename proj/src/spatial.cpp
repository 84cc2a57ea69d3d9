#include "lm/spatial.hpp"

#include <algorithm>
#include <map>

namespace lm {

PointIndex::PointIndex(std::vector<IndexedPoint> points) : pts_(std::move(points)) {
  std::stable_sort(pts_.begin(), pts_.end(),
                   [](const IndexedPoint& a, const IndexedPoint& b) {
                     return a.p.x() < b.p.x();
                   });
  const std::size_t n = pts_.size();
  if (n == 0) return;
  node_pts_.assign(4 * n, {});

  // Iterative top-down fill: each point lands in the O(log n) nodes
  // covering its rank, then the per-node lists are sorted by ordinate.
  struct Frame {
    std::size_t node, lo, hi;
  };
  std::vector<Frame> stack{{1, 0, n - 1}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    auto& ids = node_pts_[f.node];
    ids.reserve(f.hi - f.lo + 1);
    for (std::size_t i = f.lo; i <= f.hi; ++i) ids.push_back(int(i));
    std::sort(ids.begin(), ids.end(), [this](int a, int b) {
      return pts_[a].p.y() < pts_[b].p.y();
    });
    stored_entries_ += ids.size();
    if (f.lo < f.hi) {
      const std::size_t mid = (f.lo + f.hi) / 2;
      stack.push_back({2 * f.node, f.lo, mid});
      stack.push_back({2 * f.node + 1, mid + 1, f.hi});
    }
  }
}

void PointIndex::collect(std::size_t node, std::size_t lo, std::size_t hi,
                         std::size_t qlo, std::size_t qhi, double y_lo,
                         double y_hi, std::vector<IndexedPoint>& out) const {
  if (qlo > qhi || qlo > hi || qhi < lo) return;
  ++last_visited_;
  if (qlo <= lo && hi <= qhi) {
    const auto& ids = node_pts_[node];
    auto first = std::lower_bound(ids.begin(), ids.end(), y_lo,
                                  [this](int id, double y) {
                                    return pts_[id].p.y() < y;
                                  });
    for (auto it = first; it != ids.end() && pts_[*it].p.y() <= y_hi; ++it)
      out.push_back(pts_[*it]);
    return;
  }
  const std::size_t mid = (lo + hi) / 2;
  collect(2 * node, lo, mid, qlo, std::min(qhi, mid), y_lo, y_hi, out);
  if (qhi > mid)
    collect(2 * node + 1, mid + 1, hi, std::max(qlo, mid + 1), qhi, y_lo, y_hi, out);
}

std::vector<IndexedPoint> PointIndex::range_query(double x_lo, double x_hi,
                                                  double y_lo, double y_hi) const {
  last_visited_ = 0;
  std::vector<IndexedPoint> out;
  if (pts_.empty() || x_lo > x_hi || y_lo > y_hi) return out;

  const auto x_less = [](const IndexedPoint& pt, double x) { return pt.p.x() < x; };
  const std::size_t lo =
      std::lower_bound(pts_.begin(), pts_.end(), x_lo, x_less) - pts_.begin();
  std::size_t hi =
      std::lower_bound(pts_.begin(), pts_.end(), x_hi, x_less) - pts_.begin();
  while (hi < pts_.size() && pts_[hi].p.x() <= x_hi) ++hi;
  if (lo >= hi) return out;
  collect(1, 0, pts_.size() - 1, lo, hi - 1, y_lo, y_hi, out);
  return out;
}

PointIndex build_index(const std::vector<std::pair<Point, int>>& points) {
  std::vector<IndexedPoint> pts;
  pts.reserve(points.size());
  std::map<int, int> next_vertex;
  for (const auto& [p, poly_id] : points)
    pts.push_back({p, poly_id, next_vertex[poly_id]++});
  return PointIndex(std::move(pts));
}

}  // namespace lm
