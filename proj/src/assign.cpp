#include "lm/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace lm {

namespace {

struct MemberInfo {
  int id = 0;
  std::vector<Point> polyline;
  double width = 0.0;      // trace width, or pair envelope width
  double delta_len = 0.0;  // extension the group demands
};

std::vector<MemberInfo> collect_members(const Layout& layout) {
  std::vector<MemberInfo> out;
  std::set<int> seen;
  for (const MatchGroup& g : layout.groups) {
    for (int id : g.members) {
      if (!seen.insert(id).second) continue;
      MemberInfo m;
      m.id = id;
      if (const Trace* t = layout.find_trace(id)) {
        m.polyline = t->nodes;
        m.width = t->width;
      } else if (const DifferentialPair* p = layout.find_pair(id)) {
        const Trace* tp = layout.find_trace(p->trace_p);
        m.polyline = tp->nodes;
        m.width = p->gap + 2.0 * tp->width;  // pair envelope
      } else {
        throw std::runtime_error("group member " + std::to_string(id) +
                                 " is neither trace nor pair");
      }
      m.delta_len = std::max(0.0, g.target_length - member_length(layout, id));
      out.push_back(std::move(m));
    }
  }
  return out;
}

using Interval = std::pair<double, double>;

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end());
  std::vector<Interval> out;
  for (const Interval& iv : v) {
    if (iv.second - iv.first <= kEpsGeom) continue;
    if (!out.empty() && iv.first <= out.back().second + kEpsGeom)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  return out;
}

std::vector<Interval> subtract_intervals(const std::vector<Interval>& base,
                                         const std::vector<Interval>& holes) {
  std::vector<Interval> cur = base;
  for (const Interval& h : holes) {
    std::vector<Interval> next;
    for (const Interval& b : cur) {
      if (h.second <= b.first + kEpsGeom || h.first >= b.second - kEpsGeom) {
        next.push_back(b);
        continue;
      }
      if (h.first > b.first + kEpsGeom) next.emplace_back(b.first, h.first);
      if (h.second < b.second - kEpsGeom) next.emplace_back(h.second, b.second);
    }
    cur = std::move(next);
  }
  return cur;
}

// y-intervals of a simple polygon cut by the vertical line x = x0.
std::vector<Interval> polygon_cross_intervals(const Polygon& poly, double x0) {
  std::vector<double> ys;
  const auto& vs = poly.vertices();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Point& a = vs[i];
    const Point& b = vs[(i + 1) % vs.size()];
    if ((a.x() > x0) != (b.x() > x0))
      ys.push_back(a.y() + (x0 - a.x()) / (b.x() - a.x()) * (b.y() - a.y()));
  }
  std::sort(ys.begin(), ys.end());
  std::vector<Interval> out;
  for (std::size_t k = 0; k + 1 < ys.size(); k += 2) out.emplace_back(ys[k], ys[k + 1]);
  return out;
}

// Conservative y-extent of a polyline envelope on the line x = x0.
std::vector<Interval> envelope_cross_intervals(const std::vector<Point>& nodes,
                                               double half_width, double x0) {
  std::vector<Interval> out;
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const Point u = (nodes[s + 1] - nodes[s]).normalized();
    const Point a = nodes[s] - half_width * u;
    const Point b = nodes[s + 1] + half_width * u;
    if ((a.x() - x0) * (b.x() - x0) > 0.0) continue;
    if (std::abs(u.x()) < 0.5) {
      out.emplace_back(std::min(a.y(), b.y()) - half_width,
                       std::max(a.y(), b.y()) + half_width);
    } else {
      const double yc = a.y() + (x0 - a.x()) / (b.x() - a.x()) * (b.y() - a.y());
      const double e = half_width / std::abs(u.x());
      out.emplace_back(yc - e, yc + e);
    }
  }
  return merge_intervals(std::move(out));
}

// Length of segment clipped to an axis-aligned rectangle (Liang-Barsky).
double clipped_length(const Point& a, const Point& b, const Point& lo,
                      const Point& hi) {
  double t0 = 0.0, t1 = 1.0;
  const Point d = b - a;
  for (int axis = 0; axis < 2; ++axis) {
    const double p[2] = {-d[axis], d[axis]};
    const double q[2] = {a[axis] - lo[axis], hi[axis] - a[axis]};
    for (int k = 0; k < 2; ++k) {
      if (std::abs(p[k]) < 1e-12) {
        if (q[k] < 0.0) return 0.0;
        continue;
      }
      const double t = q[k] / p[k];
      if (p[k] < 0.0)
        t0 = std::max(t0, t);
      else
        t1 = std::min(t1, t);
    }
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

Polygon rect_polygon(double x0, double x1, double y0, double y1) {
  return Polygon({Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)});
}

}  // namespace

std::pair<std::vector<Region>, std::vector<Demand>> build_regions(
    const Layout& layout, double slab_pitch) {
  if (slab_pitch <= 0.0) throw std::invalid_argument("slab pitch must be positive");
  const std::vector<MemberInfo> members = collect_members(layout);
  std::set<int> member_trace_ids;
  for (const MemberInfo& m : members) {
    member_trace_ids.insert(m.id);
    if (const DifferentialPair* p = layout.find_pair(m.id)) {
      member_trace_ids.insert(p->trace_p);
      member_trace_ids.insert(p->trace_n);
    }
  }

  // Strip breakpoints: every polygon vertex plus the pitch raster.
  std::set<double> xs;
  for (const Dra& d : layout.dras)
    for (const Point& v : d.region.vertices()) xs.insert(v.x());
  for (const Polygon& o : layout.obstacles)
    for (const Point& v : o.vertices()) xs.insert(v.x());
  for (const Trace& t : layout.traces) {
    if (member_trace_ids.count(t.id)) continue;
    const double hw = 0.5 * (t.width + layout.dra_at(t.nodes.front()).rules.d_gap);
    for (const Point& v : t.nodes) {
      xs.insert(v.x() - hw);
      xs.insert(v.x() + hw);
    }
  }
  std::vector<double> breaks(xs.begin(), xs.end());
  std::vector<double> strips;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    strips.push_back(breaks[k]);
    const double span = breaks[k + 1] - breaks[k];
    const int parts = std::max(1, int(std::ceil(span / slab_pitch - 1e-12)));
    for (int p = 1; p < parts; ++p) strips.push_back(breaks[k] + span * p / parts);
  }
  if (!breaks.empty()) strips.push_back(breaks.back());

  std::vector<Region> regions;
  std::vector<Demand> demands;
  int next_id = 0;
  for (std::size_t s = 0; s + 1 < strips.size(); ++s) {
    const double x0 = strips[s], x1 = strips[s + 1];
    if (x1 - x0 <= kEpsGeom) continue;
    const double xm = 0.5 * (x0 + x1);

    std::vector<Interval> covered;
    for (const Dra& d : layout.dras) {
      auto ivs = polygon_cross_intervals(d.region, xm);
      covered.insert(covered.end(), ivs.begin(), ivs.end());
    }
    covered = merge_intervals(std::move(covered));

    std::vector<Interval> holes;
    for (const Polygon& o : layout.obstacles) {
      auto ivs = polygon_cross_intervals(o, xm);
      holes.insert(holes.end(), ivs.begin(), ivs.end());
    }
    for (const Trace& t : layout.traces) {
      if (member_trace_ids.count(t.id)) continue;
      const double hw = 0.5 * (t.width + layout.dra_at(t.nodes.front()).rules.d_gap);
      auto ivs = envelope_cross_intervals(t.nodes, hw, xm);
      holes.insert(holes.end(), ivs.begin(), ivs.end());
    }

    for (const Interval& iv : subtract_intervals(covered, merge_intervals(std::move(holes)))) {
      Region reg;
      reg.id = next_id++;
      reg.polygon = rect_polygon(x0, x1, iv.first, iv.second);
      reg.dra_id = layout.dra_at(Point(xm, 0.5 * (iv.first + iv.second))).id;
      const RuleSet* rules = nullptr;
      for (const Dra& d : layout.dras)
        if (d.id == reg.dra_id) rules = &d.rules;

      double cap = (x1 - x0) * (iv.second - iv.first);
      const Point lo(x0, iv.first), hi(x1, iv.second);
      for (const MemberInfo& m : members) {
        const double env_w = m.width + rules->d_gap;
        double inside = 0.0;
        for (std::size_t k = 0; k + 1 < m.polyline.size(); ++k)
          inside += clipped_length(m.polyline[k], m.polyline[k + 1], lo, hi);
        cap -= inside * env_w;
      }
      reg.capacity = std::max(0.0, cap);

      for (const MemberInfo& m : members) {
        const double reach = 0.5 * m.width + rules->d_gap;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < m.polyline.size() && dmin > reach; ++k)
          dmin = std::min(dmin, seg_polygon_dist(Segment(m.polyline[k], m.polyline[k + 1]),
                                                 reg.polygon));
        if (dmin <= reach) reg.neighbors.push_back(m.id);
      }
      regions.push_back(std::move(reg));
    }
  }

  for (const MemberInfo& m : members) {
    const double d_gap = layout.dra_at(m.polyline.front()).rules.d_gap;
    demands.push_back({m.id, 0.5 * m.delta_len * (m.width + d_gap)});
  }
  return {std::move(regions), std::move(demands)};
}

namespace {

// Dinic max-flow on 64-bit capacities.
class Dinic {
 public:
  explicit Dinic(int n) : head_(n, -1), level_(n), it_(n) {}

  void add_edge(int a, int b, long long cap) {
    edges_.push_back({b, head_[a], cap});
    head_[a] = int(edges_.size()) - 1;
    edges_.push_back({a, head_[b], 0});
    head_[b] = int(edges_.size()) - 1;
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      it_ = head_;
      while (long long f = dfs(s, t, std::numeric_limits<long long>::max()))
        flow += f;
    }
    return flow;
  }

  long long edge_flow(int idx) const { return edges_[2 * idx + 1].cap; }
  long long edge_residual(int idx) const { return edges_[2 * idx].cap; }

  // Nodes that can still reach t in the residual graph (reverse BFS).
  std::vector<bool> reaches_sink(int t) const {
    std::vector<bool> seen(head_.size(), false);
    std::queue<int> q;
    q.push(t);
    seen[t] = true;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = edges_[e].next) {
        // Edge v->u with residual on the reverse edge u->v means u can
        // push toward v.
        const int u = edges_[e].to;
        if (!seen[u] && edges_[e ^ 1].cap > 0) {
          seen[u] = true;
          q.push(u);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to, next;
    long long cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = edges_[e].next)
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  long long dfs(int v, int t, long long pushed) {
    if (v == t) return pushed;
    for (int& e = it_[v]; e >= 0; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > 0 && level_[ed.to] == level_[v] + 1) {
        const long long f = dfs(ed.to, t, std::min(pushed, ed.cap));
        if (f > 0) {
          ed.cap -= f;
          edges_[e ^ 1].cap += f;
          return f;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

Assignment solve_assignment(const std::vector<Region>& regions,
                            const std::vector<Demand>& demands) {
  Assignment out;
  double max_v = 1.0;
  for (const Region& r : regions) max_v = std::max(max_v, r.capacity);
  double total_req = 0.0;
  for (const Demand& d : demands) {
    max_v = std::max(max_v, d.required);
    total_req += d.required;
  }
  max_v = std::max(max_v, total_req);
  double scale = 1LL << 20;
  while (max_v * scale > 4.0e18) scale *= 0.5;

  const auto to_fixed = [&](double v) { return (long long)std::llround(v * scale); };

  const int nr = int(regions.size());
  const int nd = int(demands.size());
  const int source = 0, sink = 1 + nr + nd;
  Dinic dinic(nr + nd + 2);

  std::map<int, int> demand_node;  // member id -> node
  for (int k = 0; k < nd; ++k) demand_node[demands[k].member_id] = 1 + nr + k;

  std::vector<int> cap_edge(nr), req_edge(nd);
  std::map<std::pair<int, int>, int> mid_edge;
  int edge_count = 0;
  for (int k = 0; k < nr; ++k) {
    dinic.add_edge(source, 1 + k, to_fixed(regions[k].capacity));
    cap_edge[k] = edge_count++;
  }
  for (int k = 0; k < nd; ++k) {
    dinic.add_edge(1 + nr + k, sink, to_fixed(demands[k].required));
    req_edge[k] = edge_count++;
  }
  for (int k = 0; k < nr; ++k)
    for (int member : regions[k].neighbors) {
      const auto it = demand_node.find(member);
      if (it == demand_node.end()) continue;
      dinic.add_edge(1 + k, it->second, std::numeric_limits<long long>::max() / 4);
      mid_edge[{k, member}] = edge_count++;
    }

  const long long flow = dinic.run(source, sink);
  out.total_required = total_req;
  out.total_assigned = double(flow) / scale;
  out.feasible = flow >= to_fixed(total_req);

  for (const auto& [key, idx] : mid_edge) {
    const long long f = dinic.edge_flow(idx);
    if (f > 0)
      out.alloc[{regions[key.first].id, key.second}] = double(f) / scale;
  }
  if (!out.feasible) {
    for (int k = 0; k < nd; ++k)
      if (dinic.edge_residual(req_edge[k]) > 0)
        out.deficient_members.push_back(demands[k].member_id);
    const std::vector<bool> reach = dinic.reaches_sink(sink);
    for (int k = 0; k < nr; ++k)
      if (reach[1 + k] && dinic.edge_residual(cap_edge[k]) == 0)
        out.saturated_regions.push_back(regions[k].id);
  }
  return out;
}

std::map<int, std::vector<Polygon>> carve_routable_areas(
    const Layout& layout, const std::vector<Region>& regions,
    const Assignment& assignment) {
  if (!assignment.feasible)
    throw std::runtime_error("cannot carve an infeasible assignment");
  const std::vector<MemberInfo> members = collect_members(layout);

  struct Band {
    int member;
    double x0, x1, y0, y1;
    bool horizontal_cuts;
  };
  std::vector<Band> bands;

  for (const Region& reg : regions) {
    const auto bb = reg.polygon.bounding_box();
    const Point lo = bb.first, hi = bb.second;

    struct User {
      const MemberInfo* m;
      double share = 0.0;  // gross area to receive
      bool crosses = false;
      Point clip_lo, clip_hi;     // bbox of the clipped polyline portion
      double pos = 0.0;           // ordering coordinate along the cut axis
      double req_lo = 0.0, req_hi = 0.0;  // extent the band must contain
    };
    std::vector<User> users;
    double sum_dx = 0.0, sum_dy = 0.0;
    const RuleSet* rules = nullptr;
    for (const Dra& d : layout.dras)
      if (d.id == reg.dra_id) rules = &d.rules;

    for (const MemberInfo& m : members) {
      double alloc = 0.0;
      if (auto it = assignment.alloc.find({reg.id, m.id});
          it != assignment.alloc.end())
        alloc = it->second;
      double inside = 0.0;
      Point clo = Point::Constant(std::numeric_limits<double>::infinity());
      Point chi = -clo;
      for (std::size_t k = 0; k + 1 < m.polyline.size(); ++k) {
        const double len = clipped_length(m.polyline[k], m.polyline[k + 1], lo, hi);
        if (len <= kEpsGeom) continue;
        inside += len;
        const Point d = m.polyline[k + 1] - m.polyline[k];
        sum_dx += std::abs(d.x()) * len / d.norm();
        sum_dy += std::abs(d.y()) * len / d.norm();
        for (const Point& p : {m.polyline[k], m.polyline[k + 1]}) {
          clo = clo.cwiseMin(p);
          chi = chi.cwiseMax(p);
        }
      }
      if (alloc <= kEpsGeom && inside <= kEpsGeom) continue;
      User u;
      u.m = &m;
      u.share = alloc + inside * (m.width + rules->d_gap);
      u.crosses = inside > kEpsGeom;
      u.clip_lo = u.crosses ? clo : m.polyline.front();
      u.clip_hi = u.crosses ? chi : m.polyline.front();
      users.push_back(u);
    }
    if (users.empty()) continue;

    // Cuts run parallel to the dominant trace direction: horizontal
    // traces stack into horizontal bands.
    const bool horizontal = sum_dx >= sum_dy;
    const int axis = horizontal ? 1 : 0;
    for (User& u : users) {
      const double hw = u.crosses ? 0.5 * (u.m->width + rules->d_gap) : 0.0;
      u.req_lo = u.clip_lo[axis] - hw;
      u.req_hi = u.clip_hi[axis] + hw;
      u.pos = 0.5 * (u.clip_lo[axis] + u.clip_hi[axis]);
    }

    std::sort(users.begin(), users.end(),
              [](const User& a, const User& b) { return a.pos < b.pos; });

    const double lo_c = horizontal ? lo.y() : lo.x();
    const double hi_c = horizontal ? hi.y() : hi.x();
    const double breadth = horizontal ? hi.x() - lo.x() : hi.y() - lo.y();

    if (users.size() == 1) {
      bands.push_back({users[0].m->id, lo.x(), hi.x(), lo.y(), hi.y(), horizontal});
      continue;
    }

    // Unallocated capacity is split pro rata so the bands tile the
    // region; the symmetric two-trace case then cuts exactly through
    // the middle.
    double share_sum = 0.0;
    for (const User& u : users) share_sum += u.share;
    const double region_area = (hi.x() - lo.x()) * (hi.y() - lo.y());
    if (share_sum > kEpsGeom)
      for (User& u : users) u.share *= region_area / share_sum;

    // Cut positions from cumulative shares, clamped so every member's
    // own envelope stays inside its band.
    std::vector<double> cuts(users.size() + 1);
    cuts.front() = lo_c;
    cuts.back() = hi_c;
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < users.size(); ++k) {
      cum += users[k].share;
      double c = lo_c + cum / breadth;
      const double lo_bound = std::max(cuts[k], users[k].req_hi);
      const double hi_bound = users[k + 1].req_lo;
      if (lo_bound > hi_bound + kEpsGeom)
        throw std::runtime_error(
            "carving cannot contain the original polylines in region " +
            std::to_string(reg.id));
      c = std::clamp(c, lo_bound, hi_bound);
      c = std::clamp(c, lo_c, hi_c);
      cuts[k + 1] = c;
    }
    for (std::size_t k = 0; k < users.size(); ++k) {
      if (cuts[k + 1] - cuts[k] <= kEpsGeom) continue;
      if (horizontal)
        bands.push_back({users[k].m->id, lo.x(), hi.x(), cuts[k], cuts[k + 1], true});
      else
        bands.push_back({users[k].m->id, cuts[k], cuts[k + 1], lo.y(), hi.y(), false});
    }
  }

  // Fuse each member's bands into rectilinear polygons, so a corridor
  // sliced by the strip decomposition comes back as one routable area.
  std::map<int, std::vector<Polygon>> out;
  std::map<int, std::vector<Band>> by_member;
  for (const Band& b : bands) by_member[b.member].push_back(b);
  for (auto& [member, list] : by_member) {
    std::vector<std::array<double, 4>> rects;
    for (const Band& b : list) rects.push_back({b.x0, b.x1, b.y0, b.y1});
    for (Polygon& poly : rectilinear_union(rects)) out[member].push_back(std::move(poly));
  }

  // Every member keeps the parts of its own polyline that lie in the
  // carved regions; losing one (a trace running through an obstacle or
  // squeezed into another member's slice) signals an assignment or
  // geometry mismatch and must not pass silently.
  for (const MemberInfo& m : members) {
    const auto it = out.find(m.id);
    std::vector<Point> probes = m.polyline;
    for (std::size_t k = 0; k + 1 < m.polyline.size(); ++k)
      probes.push_back(0.5 * (m.polyline[k] + m.polyline[k + 1]));
    for (const Point& p : probes) {
      bool in_regions = false;
      for (const Region& reg : regions)
        if (point_in_polygon(p, reg.polygon) == Containment::Inside)
          in_regions = true;
      if (!in_regions) continue;
      bool inside = false;
      if (it != out.end())
        for (const Polygon& poly : it->second)
          if (point_in_polygon(p, poly) != Containment::Outside) inside = true;
      if (!inside)
        throw std::runtime_error(
            "carving cannot contain the original polyline of member " +
            std::to_string(m.id));
    }
  }
  return out;
}

std::vector<Polygon> rectilinear_union(
    const std::vector<std::array<double, 4>>& rects) {
  std::vector<Polygon> out;
  if (rects.empty()) return out;

  const auto snap_axis = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> snapped;
    for (double x : v)
      if (snapped.empty() || x - snapped.back() > 1e-7) snapped.push_back(x);
    return snapped;
  };
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    xs.push_back(r[0]);
    xs.push_back(r[1]);
    ys.push_back(r[2]);
    ys.push_back(r[3]);
  }
  xs = snap_axis(std::move(xs));
  ys = snap_axis(std::move(ys));
  const int nx = int(xs.size()) - 1, ny = int(ys.size()) - 1;
  if (nx <= 0 || ny <= 0) return out;

  std::vector<std::vector<bool>> covered(nx, std::vector<bool>(ny, false));
  for (const auto& r : rects)
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const double cx = 0.5 * (xs[i] + xs[i + 1]);
        const double cy = 0.5 * (ys[j] + ys[j + 1]);
        if (cx > r[0] && cx < r[1] && cy > r[2] && cy < r[3]) covered[i][j] = true;
      }
  const auto cell = [&](int i, int j) {
    return i >= 0 && i < nx && j >= 0 && j < ny && covered[i][j];
  };

  // Directed boundary edges with the interior on the left, stitched
  // into loops; clockwise loops are holes and are dropped (obstacles
  // remain separate environment polygons anyway).
  struct Pt {
    int i, j;
    bool operator<(const Pt& o) const { return i != o.i ? i < o.i : j < o.j; }
  };
  std::map<Pt, std::vector<Pt>> next;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (!covered[i][j]) continue;
      if (!cell(i, j - 1)) next[{i, j}].push_back({i + 1, j});          // bottom
      if (!cell(i + 1, j)) next[{i + 1, j}].push_back({i + 1, j + 1});  // right
      if (!cell(i, j + 1)) next[{i + 1, j + 1}].push_back({i, j + 1});  // top
      if (!cell(i - 1, j)) next[{i, j + 1}].push_back({i, j});          // left
    }

  while (!next.empty()) {
    const Pt start = next.begin()->first;
    std::vector<Pt> loop;
    Pt cur = start;
    Pt dir{0, 0};
    while (true) {
      auto it = next.find(cur);
      if (it == next.end() || it->second.empty()) break;
      // Prefer the sharpest left turn to keep contours simple where
      // regions touch at a corner.
      std::size_t pick = 0;
      double best = -4.0;
      for (std::size_t k = 0; k < it->second.size(); ++k) {
        const Pt to = it->second[k];
        const Pt d{to.i - cur.i, to.j - cur.j};
        const double cross = double(dir.i) * d.j - double(dir.j) * d.i;
        const double dot = double(dir.i) * d.i + double(dir.j) * d.j;
        const double score = (dir.i == 0 && dir.j == 0) ? 0.0 : std::atan2(cross, dot);
        if (score > best) {
          best = score;
          pick = k;
        }
      }
      const Pt to = it->second[pick];
      it->second.erase(it->second.begin() + pick);
      if (it->second.empty()) next.erase(it);
      dir = Pt{to.i - cur.i, to.j - cur.j};
      loop.push_back(cur);
      cur = to;
      if (cur.i == start.i && cur.j == start.j) break;
    }
    if (loop.size() < 4) continue;
    std::vector<Point> pts;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Pt& a = loop[k];
      const Pt& b = loop[(k + 1) % loop.size()];
      const Pt& z = loop[(k + loop.size() - 1) % loop.size()];
      // Drop collinear intermediate grid points.
      if ((a.i - z.i) * (b.j - a.j) == (a.j - z.j) * (b.i - a.i)) continue;
      pts.emplace_back(xs[a.i], ys[a.j]);
    }
    if (pts.size() < 3) continue;
    double signed_area = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Point& a = pts[k];
      const Point& b = pts[(k + 1) % pts.size()];
      signed_area += a.x() * b.y() - a.y() * b.x();
    }
    if (signed_area <= 0.0) continue;  // hole
    out.emplace_back(std::move(pts));
  }
  return out;
}

}  // namespace lm
