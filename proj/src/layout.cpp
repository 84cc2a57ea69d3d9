#include "lm/layout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lm {

namespace {

std::string fmt_point(const Point& p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.3f,%.3f)", p.x(), p.y());
  return buf;
}

// Closest points between two segments (valid when they do not cross).
std::pair<Point, Point> closest_points(const Segment& s1, const Segment& s2) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<Point, Point> out{s1.a, s2.a};
  const auto consider = [&](const Point& p, const Segment& s, bool p_on_first) {
    const Point d = s.b - s.a;
    const double t = std::clamp((p - s.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    const Point q = s.a + t * d;
    const double dd = dist(p, q);
    if (dd < best) {
      best = dd;
      out = p_on_first ? std::make_pair(p, q) : std::make_pair(q, p);
    }
  };
  consider(s1.a, s2, true);
  consider(s1.b, s2, true);
  consider(s2.a, s1, false);
  consider(s2.b, s1, false);
  return out;
}

// Same-net spacing exemption: the gap between two pieces of one trace
// does not count when the straight line between their closest points
// runs through the trace's own copper (e.g. a hat over the chord it
// detours from, shielded by the connecting side).
bool gap_shielded_by_own_copper(const Trace& trace, const Point& p,
                                const Point& q) {
  const double half_w = 0.5 * trace.width + kEpsGeom;
  const int samples = 9;
  for (int k = 1; k < samples; ++k) {
    const double t = double(k) / samples;
    const Point m = p + t * (q - p);
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < trace.nodes.size(); ++i)
      d = std::min(d, seg_point_dist(Segment(trace.nodes[i], trace.nodes[i + 1]), m));
    if (d > half_w) return false;
  }
  return true;
}

}  // namespace

const Trace* Layout::find_trace(int id) const {
  for (const Trace& t : traces)
    if (t.id == id) return &t;
  return nullptr;
}

Trace* Layout::find_trace(int id) {
  for (Trace& t : traces)
    if (t.id == id) return &t;
  return nullptr;
}

const DifferentialPair* Layout::find_pair(int id) const {
  for (const DifferentialPair& p : pairs)
    if (p.id == id) return &p;
  return nullptr;
}

const Dra& Layout::dra_at(const Point& p) const {
  if (dras.empty()) throw std::runtime_error("layout has no DRAs");
  const Dra* best = nullptr;
  for (const Dra& d : dras) {
    if (point_in_polygon(p, d.region) != Containment::Outside) {
      if (!best || d.id < best->id) best = &d;
    }
  }
  if (best) return *best;
  // Numeric drift can push a point marginally outside every region;
  // fall back to the nearest border.
  double best_d = std::numeric_limits<double>::infinity();
  for (const Dra& d : dras) {
    const auto& vs = d.region.vertices();
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const double dd = seg_point_dist(Segment(vs[i], vs[(i + 1) % vs.size()]), p);
      if (dd < best_d) {
        best_d = dd;
        best = &d;
      }
    }
  }
  return *best;
}

double polyline_length(const std::vector<Point>& nodes) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    len += dist(nodes[i], nodes[i + 1]);
  return len;
}

double trace_length(const Trace& trace) { return polyline_length(trace.nodes); }

std::string Violation::describe() const {
  static const char* names[] = {"gap", "obstacle", "short-segment", "outside-area"};
  std::ostringstream os;
  os << names[int(rule)] << " " << entity_a;
  if (!entity_b.empty()) os << " vs " << entity_b;
  os << " measured " << measured << " < " << limit << " at " << fmt_point(where);
  return os.str();
}

std::string Violation::fingerprint() const {
  std::ostringstream os;
  os << int(rule) << "|" << entity_a << "|" << entity_b << "|" << fmt_point(where);
  return os.str();
}

namespace {

double max_gap_rule(const Layout& layout) {
  double m = 0.0;
  for (const Dra& d : layout.dras) m = std::max(m, d.rules.d_gap);
  return m;
}

void check_trace_pairwise(const Layout& layout, const Trace& ta, const Trace& tb,
                          std::vector<Violation>& out) {
  const bool same = ta.id == tb.id && &ta == &tb;
  const double reject = max_gap_rule(layout) + 0.5 * (ta.width + tb.width);
  for (std::size_t i = 0; i + 1 < ta.nodes.size(); ++i) {
    const Segment sa(ta.nodes[i], ta.nodes[i + 1]);
    const Point a_lo = sa.a.cwiseMin(sa.b), a_hi = sa.a.cwiseMax(sa.b);
    const std::size_t j0 = same ? i + 2 : 0;  // skip self and adjacent
    for (std::size_t j = j0; j + 1 < tb.nodes.size(); ++j) {
      const Segment sb(tb.nodes[j], tb.nodes[j + 1]);
      const Point b_lo = sb.a.cwiseMin(sb.b), b_hi = sb.a.cwiseMax(sb.b);
      if (std::max(std::max(a_lo.x() - b_hi.x(), b_lo.x() - a_hi.x()),
                   std::max(a_lo.y() - b_hi.y(), b_lo.y() - a_hi.y())) > reject)
        continue;
      if (same) {
        // Non-consecutive segments sharing a node (e.g. around a merged
        // pattern junction) count as adjacent as well.
        if (points_equal(sa.a, sb.a) || points_equal(sa.a, sb.b) ||
            points_equal(sa.b, sb.a) || points_equal(sa.b, sb.b))
          continue;
      }
      const double center = seg_seg_dist(sa, sb);
      const double edge = center - 0.5 * (ta.width + tb.width);
      const auto [p, q] = closest_points(sa, sb);
      const Point mid = 0.5 * (p + q);
      const double rule = layout.dra_at(mid).rules.d_gap;
      if (edge >= rule - kEpsGeom) continue;
      if (same && gap_shielded_by_own_copper(ta, p, q)) continue;
      Violation v;
      v.rule = Violation::Rule::Gap;
      v.entity_a = "trace:" + std::to_string(ta.id) + "/seg:" + std::to_string(i);
      v.entity_b = "trace:" + std::to_string(tb.id) + "/seg:" + std::to_string(j);
      v.measured = edge;
      v.limit = rule;
      v.where = mid;
      out.push_back(std::move(v));
    }
  }
}

}  // namespace

std::vector<Violation> drc_check(const Layout& layout) {
  std::vector<Violation> out;

  // The sub-traces of one differential pair follow their own coupling
  // rule, not d_gap.
  std::set<std::pair<int, int>> coupled;
  for (const DifferentialPair& p : layout.pairs) {
    coupled.insert({std::min(p.trace_p, p.trace_n), std::max(p.trace_p, p.trace_n)});
  }

  for (std::size_t a = 0; a < layout.traces.size(); ++a) {
    const Trace& ta = layout.traces[a];
    check_trace_pairwise(layout, ta, ta, out);
    for (std::size_t b = a + 1; b < layout.traces.size(); ++b) {
      const Trace& tb = layout.traces[b];
      if (coupled.count({std::min(ta.id, tb.id), std::max(ta.id, tb.id)})) continue;
      check_trace_pairwise(layout, ta, tb, out);
    }
  }

  for (const Trace& t : layout.traces) {
    for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i) {
      const Segment s(t.nodes[i], t.nodes[i + 1]);
      const Point mid = 0.5 * (s.a + s.b);
      const RuleSet& rules = layout.dra_at(mid).rules;

      for (std::size_t k = 0; k < layout.obstacles.size(); ++k) {
        const double edge = seg_polygon_dist(s, layout.obstacles[k]) - 0.5 * t.width;
        if (edge < rules.d_obs - kEpsGeom) {
          Violation v;
          v.rule = Violation::Rule::Obstacle;
          v.entity_a = "trace:" + std::to_string(t.id) + "/seg:" + std::to_string(i);
          v.entity_b = "obstacle:" + std::to_string(k);
          v.measured = edge;
          v.limit = rules.d_obs;
          v.where = mid;
          out.push_back(std::move(v));
        }
      }

      if (s.length() < rules.d_protect - kEpsGeom) {
        Violation v;
        v.rule = Violation::Rule::ShortSegment;
        v.entity_a = "trace:" + std::to_string(t.id) + "/seg:" + std::to_string(i);
        v.measured = s.length();
        v.limit = rules.d_protect;
        v.where = mid;
        out.push_back(std::move(v));
      }
    }

    const auto areas = layout.routable_areas.find(t.id);
    if (areas != layout.routable_areas.end() && !areas->second.empty()) {
      auto check_point = [&](const Point& p, std::size_t seg_idx) {
        for (const Polygon& poly : areas->second)
          if (point_in_polygon(p, poly) != Containment::Outside) return;
        Violation v;
        v.rule = Violation::Rule::OutsideArea;
        v.entity_a = "trace:" + std::to_string(t.id) + "/seg:" + std::to_string(seg_idx);
        v.measured = 0.0;
        v.limit = 0.0;
        v.where = p;
        out.push_back(std::move(v));
      };
      for (std::size_t i = 0; i < t.nodes.size(); ++i)
        check_point(t.nodes[i], i == 0 ? 0 : i - 1);
      for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
        check_point(0.5 * (t.nodes[i] + t.nodes[i + 1]), i);
    }
  }
  return out;
}

std::set<std::string> violation_fingerprints(const std::vector<Violation>& v) {
  std::set<std::string> out;
  for (const Violation& x : v) out.insert(x.fingerprint());
  return out;
}

std::vector<Violation> new_violations(const Layout& layout) {
  std::vector<Violation> out;
  for (Violation& v : drc_check(layout))
    if (!layout.legacy.count(v.fingerprint())) out.push_back(std::move(v));
  return out;
}

double member_length(const Layout& layout, int member_id) {
  if (const Trace* t = layout.find_trace(member_id)) return trace_length(*t);
  if (const DifferentialPair* p = layout.find_pair(member_id)) {
    const Trace* tp = layout.find_trace(p->trace_p);
    const Trace* tn = layout.find_trace(p->trace_n);
    if (!tp || !tn) throw std::runtime_error("pair references missing trace");
    return 0.5 * (trace_length(*tp) + trace_length(*tn));
  }
  throw std::runtime_error("unknown group member id " + std::to_string(member_id));
}

std::pair<double, double> group_metrics(const MatchGroup& group,
                                        const Layout& layout) {
  if (group.members.empty()) return {0.0, 0.0};
  double max_err = 0.0, sum_err = 0.0;
  for (int id : group.members) {
    const double len = member_length(layout, id);
    if (len > group.target_length + 1e-6)
      throw std::runtime_error("member " + std::to_string(id) +
                               " exceeds the group target length");
    const double err = (group.target_length - len) / group.target_length;
    max_err = std::max(max_err, err);
    sum_err += err;
  }
  return {max_err, sum_err / double(group.members.size())};
}

double extension_ratio(double l_extended, double l_original) {
  if (l_original <= 0.0)
    throw std::invalid_argument("original length must be positive");
  if (l_extended < l_original - kEpsGeom)
    throw std::invalid_argument("extended length below original");
  return (l_extended - l_original) / l_original;
}

}  // namespace lm
