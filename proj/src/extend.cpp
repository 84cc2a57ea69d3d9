#include "lm/extend.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

namespace lm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DiscretizedSegment discretize(const Segment& seg, double l_disc) {
  if (l_disc <= 0.0) throw std::invalid_argument("l_disc must be positive");
  const double len = seg.length();
  if (len < l_disc - kEpsGeom)
    throw std::invalid_argument("segment too short to extend");
  const int intervals = int(std::ceil(len / l_disc - 1e-12));
  const double step = len / intervals;
  DiscretizedSegment ds{seg, {}, step, intervals + 1};
  ds.points.reserve(ds.n);
  const Point u = seg.direction();
  for (int k = 0; k < intervals; ++k) ds.points.push_back(seg.a + (k * step) * u);
  ds.points.push_back(seg.b);
  return ds;
}

EnvPolygon make_env_polygon(Polygon poly, EnvKind kind) {
  auto bbox = poly.bounding_box();
  return EnvPolygon{std::move(poly), kind, bbox};
}

Environment::Environment(std::vector<EnvPolygon> polygons)
    : polys_(std::move(polygons)) {
  std::vector<std::pair<Point, int>> pts;
  for (std::size_t k = 0; k < polys_.size(); ++k)
    for (const Point& p : polys_[k].poly.vertices())
      pts.emplace_back(p, int(k));
  index_ = build_index(pts);
}

double max_valid_height(const Environment& env, const DiscretizedSegment& ds,
                        int i, int w, int dir, double h_request,
                        const ExtendRules& rules) {
  if (i - w < 0 || i >= ds.n) throw std::invalid_argument("pattern feet out of range");
  if (h_request <= kEpsGeom) return 0.0;
  const double clearance = rules.clearance;
  const double r = 0.5 * clearance;
  const Point f1 = ds.points[i - w];
  const Point f2 = ds.points[i];
  const Point u = ds.base.direction();
  const Point nrm = double(dir) * perp(u);
  const double span = dist(f1, f2);
  const double h_init = h_request + r;
  double h_ob = h_init;

  const auto fx = [&](const Point& p) { return (p - f1).dot(u); };
  const auto fy = [&](const Point& p) { return (p - f1).dot(nrm); };

  // World-space bounding box of the initial outer border.
  Point lo = f1 - u * r, hi = lo;
  for (const Point& c : {Point(f2 + u * r), Point(f2 + u * r + nrm * h_init),
                         Point(f1 - u * r + nrm * h_init)}) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  lo.array() -= kEpsGeom;
  hi.array() += kEpsGeom;

  // Candidate polygons by bbox overlap. A foot strictly inside an
  // obstacle-kind polygon (or outside the border) admits no pattern at
  // any height; boundary-based shrinking would not see the overlap when
  // the contact is collinear, e.g. against an adjacent segment's URA.
  std::vector<int> cand;
  for (std::size_t k = 0; k < env.polygons().size(); ++k) {
    const EnvPolygon& ep = env.polygons()[k];
    const auto& bb = ep.bbox;
    if (bb.first.x() > hi.x() || bb.second.x() < lo.x() ||
        bb.first.y() > hi.y() || bb.second.y() < lo.y())
      continue;
    for (const Point& foot : {f1, f2}) {
      const Containment c = point_in_polygon(foot, ep.poly);
      if (ep.kind == EnvKind::Obstacle ? c == Containment::Inside
                                       : c == Containment::Outside)
        return 0.0;
    }
    cand.push_back(int(k));
  }
  if (cand.empty()) {
    const double h = std::max(0.0, h_ob - r);
    return h + kEpsGeom < rules.d_protect ? 0.0 : std::min(h, h_request);
  }

  // Stage 1: shrink to the lowest crossing of the strip boundary lines.
  // The outer side lines bound the clearance strips from the outside;
  // when the pattern is wide enough for an inner notch, an edge can also
  // slip into a strip through the inner side line, so those crossings
  // bound the height as well.
  std::vector<double> lines = {-r, span + r};
  if (span > clearance + kEpsGeom) {
    lines.push_back(r);
    lines.push_back(span - r);
  }
  for (int k : cand) {
    const auto& vs = env.polygons()[k].poly.vertices();
    for (std::size_t e = 0; e < vs.size(); ++e) {
      const Point& a = vs[e];
      const Point& b = vs[(e + 1) % vs.size()];
      const double ax = fx(a), bx = fx(b);
      for (double x_line : lines) {
        const double da = ax - x_line, db = bx - x_line;
        if ((da > kEpsGeom && db < -kEpsGeom) || (da < -kEpsGeom && db > kEpsGeom)) {
          const double t = da / (da - db);
          const double y = fy(a) + t * (fy(b) - fy(a));
          if (y > kEpsGeom && y < h_ob) h_ob = y;
        }
      }
    }
  }

  // Stages 2 and 3: node-position checks, iterated because a lowered hat
  // can expose new conflicts. Straddling polygons shrink the border to
  // their lowest inside node; polygons wholly inside the outer border
  // must either sit entirely inside the inner border (a legal enclosure
  // the pattern routes around) or force the border below them.
  const auto points = env.index().range_query(lo.x(), hi.x(), lo.y(), hi.y());
  struct FramePt {
    double x, y;
    int poly;
  };
  std::vector<FramePt> fpts;
  fpts.reserve(points.size());
  for (const auto& ip : points) {
    const double x = fx(ip.p), y = fy(ip.p);
    if (x > -r + kEpsGeom && x < span + r - kEpsGeom && y > kEpsGeom)
      fpts.push_back({x, y, ip.polygon_id});
  }

  while (true) {
    std::map<int, std::pair<int, double>> inside;  // poly -> (count, min y)
    for (const FramePt& p : fpts) {
      if (p.y >= h_ob - kEpsGeom) continue;
      auto& rec = inside.try_emplace(p.poly, 0, kInf).first->second;
      rec.first += 1;
      rec.second = std::min(rec.second, p.y);
    }
    if (inside.empty()) break;

    double straddle = kInf;
    double below_whole = kInf;
    const bool notch = span > clearance + kEpsGeom && h_ob > clearance + kEpsGeom;
    for (const auto& [poly_id, rec] : inside) {
      const EnvPolygon& ep = env.polygons()[poly_id];
      const int total = int(ep.poly.size());
      if (rec.first < total) {
        straddle = std::min(straddle, rec.second);
        continue;
      }
      // Fully inside the outer border.
      bool enclosed = notch && ep.kind == EnvKind::Obstacle;
      if (enclosed) {
        for (const Point& v : ep.poly.vertices()) {
          const double x = fx(v), y = fy(v);
          if (x < r - kEpsGeom || x > span - r + kEpsGeom ||
              y > h_ob - clearance + kEpsGeom) {
            enclosed = false;
            break;
          }
        }
      }
      if (!enclosed) below_whole = std::min(below_whole, rec.second);
    }
    if (straddle < kInf) {
      h_ob = straddle;
      continue;
    }
    if (below_whole < kInf) {
      h_ob = below_whole;
      continue;
    }
    break;
  }

  const double h = std::max(0.0, std::min(h_ob - r, h_request));
  return h + kEpsGeom < rules.d_protect ? 0.0 : h;
}

namespace {

enum PredKind { kPredNode = 0, kPredProtect = 1, kPredGap = 2, kPredLocal = 3 };

struct Candidate {
  double value = -kInf;
  int kind = kPredNode;
  int from_i = -1;
  int from_dir = -1;
  int from_exact = 0;
};

}  // namespace

DpResult dp_extend_segment(const Environment& env, const DiscretizedSegment& ds,
                           double need, const ExtendRules& rules) {
  DpResult result;
  const int n = ds.n;
  const double step = ds.step;
  const int g = std::max(1, int(std::ceil(rules.clearance / step - 1e-9)));
  const int pr = std::max(1, int(std::ceil(rules.d_protect / step - 1e-9)));
  const double h_req = 0.5 * need;

  DpTable& t = result.table;
  t.n = n;
  t.step = step;
  t.gap_steps = g;
  t.protect_steps = pr;
  t.dp.assign(n, {{{-kInf, -kInf}, {-kInf, -kInf}}});
  t.transit.assign(n, {});
  t.dp[0][0][0] = 0.0;
  t.dp[0][1][0] = 0.0;

  if (need <= kEpsGeom || n < 2) {
    result.dir_max = 1;
    return result;
  }

  for (int i = 1; i < n; ++i) {
    for (int d = 0; d < 2; ++d) {
      // Carry the best previous state forward.
      const int e_best = t.dp[i - 1][d][1] >= t.dp[i - 1][d][0] ? 1 : 0;
      t.dp[i][d][0] = t.dp[i - 1][d][e_best];
      t.transit[i][d][0] = TransitRecord{i - 1, d, e_best, 0, 0.0};
    }
    const bool foot_ok =
        (n - 1 - i) >= pr || (i == n - 1 && rules.allow_node_feet);
    if (!foot_ok) continue;

    for (int d = 0; d < 2; ++d) {
      const int dir = d == 1 ? 1 : -1;
      for (int w = g; w <= i; ++w) {
        const int l = i - w;
        Candidate best;
        const auto offer = [&](double value, int kind, int fi, int fd, int fe) {
          if (value < -kInf / 2) return;
          if (value > best.value + kEpsGeom ||
              (value > best.value - kEpsGeom && kind > best.kind))
            best = Candidate{value, kind, fi, fd, fe};
        };
        if (l - g >= 0) {
          offer(t.dp[l - g][d][0], kPredGap, l - g, d, 0);
          offer(t.dp[l - g][d][1], kPredGap, l - g, d, 1);
        }
        if (l - pr >= 0) {
          offer(t.dp[l - pr][1 - d][0], kPredProtect, l - pr, 1 - d, 0);
          offer(t.dp[l - pr][1 - d][1], kPredProtect, l - pr, 1 - d, 1);
        }
        offer(t.dp[l][1 - d][1], kPredLocal, l, 1 - d, 1);  // connect to a pattern
        if (l == 0 && rules.allow_node_feet)
          offer(0.0, kPredNode, 0, d, 0);  // connect to the node point

        if (best.value < -kInf / 2) continue;
        // Prune strictly hopeless candidates only; an exact tie must
        // still be evaluated so the connected-pattern preference can
        // take it.
        if (best.value + 2.0 * h_req < t.dp[i][d][1] - kEpsGeom) continue;

        const double h = max_valid_height(env, ds, i, w, dir, h_req, rules);
        if (h <= kEpsGeom) continue;
        const double val = best.value + 2.0 * h;
        double& cur = t.dp[i][d][1];
        TransitRecord& rec = t.transit[i][d][1];
        if (val > cur + kEpsGeom) {
          cur = val;
          rec = TransitRecord{best.from_i, best.from_dir, best.from_exact, w, h};
        } else if (val > cur - kEpsGeom && best.kind == kPredLocal) {
          // Equal value: prefer the connected-pattern transition, which
          // keeps the junction foot shared and frees capacity for
          // further meandering on the meanders.
          const bool cur_connected =
              rec.width > 0 && rec.from_exact == 1 && rec.from_i == i - rec.width;
          if (!cur_connected) {
            cur = val;
            rec = TransitRecord{best.from_i, best.from_dir, best.from_exact, w, h};
          }
        }
      }
    }
  }

  const double best_pos = t.merged(n - 1, 1);
  const double best_neg = t.merged(n - 1, 0);
  result.dir_max = best_pos >= best_neg ? 1 : -1;
  result.raw_gain = std::max(0.0, std::max(best_pos, best_neg));
  if (result.raw_gain <= kEpsGeom) return result;

  std::vector<Pattern> restored = restore_patterns(t, result.dir_max);

  // Cap the applied gain at the remaining need: keep patterns in chord
  // order and trim the one that crosses the target. When the trimmed
  // height would violate d_protect, the deficit is borrowed from the
  // previous pattern so the target is still hit exactly. Lowered
  // heights are re-validated because shrinking is not monotone (an
  // obstacle legally enclosed at full height may conflict lower).
  const auto height_ok = [&](const Pattern& pat, double h) {
    return max_valid_height(env, ds, pat.foot_right, pat.width_steps, pat.dir, h,
                            rules) +
               kEpsGeom >=
           h;
  };
  double accum = 0.0;
  for (Pattern pat : restored) {
    const double gain = 2.0 * pat.height;
    if (accum + gain <= need + kEpsGeom) {
      result.patterns.push_back(pat);
      accum += gain;
      continue;
    }
    double h_trim = 0.5 * (need - accum);
    if (h_trim <= kEpsGeom) break;
    if (h_trim + kEpsGeom < rules.d_protect && !result.patterns.empty()) {
      Pattern& prev = result.patterns.back();
      const double borrow = rules.d_protect - h_trim;
      if (prev.height - borrow + kEpsGeom >= rules.d_protect &&
          height_ok(prev, prev.height - borrow)) {
        prev.height -= borrow;
        accum -= 2.0 * borrow;
        h_trim = rules.d_protect;
      }
    }
    if (h_trim + kEpsGeom >= rules.d_protect && height_ok(pat, h_trim)) {
      pat.height = h_trim;
      result.patterns.push_back(pat);
      accum += 2.0 * h_trim;
    }
    break;
  }
  result.gain = accum;
  return result;
}

std::vector<Pattern> restore_patterns(const DpTable& t, int dir_max) {
  std::vector<Pattern> out;
  if (t.n < 2) return out;
  int d = dir_max > 0 ? 1 : 0;
  int i = t.n - 1;
  int e = t.dp[i][d][1] >= t.dp[i][d][0] ? 1 : 0;
  if (t.dp[i][d][e] <= kEpsGeom) return out;

  int guard = 4 * t.n + 4;
  while (i > 0) {
    if (--guard < 0) throw std::runtime_error("corrupt transit chain");
    const TransitRecord& rec = t.transit[i][d][e];
    if (e == 1 && rec.width <= 0)
      throw std::runtime_error("corrupt transit chain: exact state without pattern");
    if (rec.width > 0)
      out.push_back(Pattern{i - rec.width, i, rec.width, rec.height, d == 1 ? 1 : -1});
    if (rec.from_i < 0) break;
    const int ni = rec.from_i, nd = rec.from_dir, ne = rec.from_exact;
    i = ni;
    d = nd;
    e = ne;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

ApplyResult apply_patterns(const DiscretizedSegment& ds,
                           const std::vector<Pattern>& patterns) {
  ApplyResult res;
  std::vector<Pattern> pats = patterns;
  std::sort(pats.begin(), pats.end(),
            [](const Pattern& a, const Pattern& b) { return a.foot_left < b.foot_left; });

  const Point u = ds.base.direction();
  std::vector<Point>& line = res.polyline;
  line.push_back(ds.points.front());
  for (const Pattern& p : pats) {
    const Point fl = ds.points[p.foot_left];
    const Point fr = ds.points[p.foot_right];
    const Point nrm = double(p.dir) * perp(u);
    if (!points_equal(line.back(), fl)) line.push_back(fl);
    line.push_back(fl + nrm * p.height);
    line.push_back(fr + nrm * p.height);
    line.push_back(fr);
    res.added_length += 2.0 * p.height;
  }
  if (!points_equal(line.back(), ds.points.back()))
    line.push_back(ds.points.back());
  else
    line.back() = ds.points.back();

  for (std::size_t k = 0; k + 1 < line.size(); ++k)
    res.new_segments.emplace_back(line[k], line[k + 1]);
  return res;
}

Trace splice_polyline(const Trace& trace, int seg_index,
                      const std::vector<Point>& polyline) {
  if (seg_index < 0 || seg_index + 1 >= int(trace.nodes.size()))
    throw std::invalid_argument("segment index out of range");
  if (!points_equal(polyline.front(), trace.nodes[seg_index]) ||
      !points_equal(polyline.back(), trace.nodes[seg_index + 1]))
    throw std::invalid_argument("polyline endpoints do not match the segment");
  Trace out = trace;
  out.nodes.clear();
  out.nodes.insert(out.nodes.end(), trace.nodes.begin(),
                   trace.nodes.begin() + seg_index);
  out.nodes.insert(out.nodes.end(), polyline.begin(), polyline.end());
  out.nodes.insert(out.nodes.end(), trace.nodes.begin() + seg_index + 2,
                   trace.nodes.end());
  return out;
}

namespace {

// Insert nodes where the polyline crosses DRA boundaries so that every
// queue entry is a whole polyline segment under a single rule set.
std::vector<Point> split_nodes_at_dra_boundaries(const Layout& layout,
                                                 const std::vector<Point>& nodes) {
  if (layout.dras.size() < 2) return nodes;
  std::vector<Point> out;
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const Segment seg(nodes[s], nodes[s + 1]);
    std::vector<double> ts;
    for (const Dra& d : layout.dras) {
      const auto& vs = d.region.vertices();
      for (std::size_t e = 0; e < vs.size(); ++e) {
        const auto isect =
            seg_seg_intersect(seg, Segment(vs[e], vs[(e + 1) % vs.size()]));
        if (isect.kind == IntersectKind::Point) {
          const double t = (isect.p0 - seg.a).dot(seg.b - seg.a) /
                           (seg.b - seg.a).squaredNorm();
          if (t > kEpsGeom && t < 1.0 - kEpsGeom) ts.push_back(t);
        }
      }
    }
    std::sort(ts.begin(), ts.end());
    out.push_back(nodes[s]);
    double last = 0.0;
    for (double tval : ts) {
      if (tval - last < kEpsGeom) continue;
      const Point p = seg.a + tval * (seg.b - seg.a);
      if (!points_equal(out.back(), p) && !points_equal(p, seg.b)) out.push_back(p);
      last = tval;
    }
  }
  out.push_back(nodes.back());
  return out;
}

struct ChordRules {
  ExtendRules ext;
  double l_disc;
  double obs_inflate;
};

ChordRules chord_rules(const Layout& layout, const Trace& trace, const Segment& seg,
                       double l_disc_override, double extra_protect,
                       bool allow_node_feet) {
  const Point mid = 0.5 * (seg.a + seg.b);
  const RuleSet& r = layout.dra_at(mid).rules;
  ChordRules cr;
  cr.ext.clearance = r.d_gap + trace.width;
  cr.ext.d_protect = r.d_protect + extra_protect;
  cr.ext.allow_node_feet = allow_node_feet;
  cr.l_disc = l_disc_override > 0.0 ? l_disc_override : 0.5 * cr.ext.d_protect;
  cr.obs_inflate = r.d_obs - 0.5 * r.d_gap;
  return cr;
}

std::optional<Environment> build_environment(const Trace& trace, int seg_index,
                                             const Layout& layout,
                                             const std::vector<Polygon>& areas,
                                             const ChordRules& cr) {
  const Segment chord(trace.nodes[seg_index], trace.nodes[seg_index + 1]);
  const Point mid = 0.5 * (chord.a + chord.b);

  const Polygon* border = nullptr;
  for (const Polygon& poly : areas) {
    if (point_in_polygon(mid, poly) != Containment::Outside &&
        point_in_polygon(chord.a, poly) != Containment::Outside &&
        point_in_polygon(chord.b, poly) != Containment::Outside) {
      border = &poly;
      break;
    }
  }
  if (!border) return std::nullopt;

  std::vector<EnvPolygon> polys;
  polys.push_back(make_env_polygon(*border, EnvKind::Border));

  const auto bb = border->bounding_box();
  for (const Polygon& obs : layout.obstacles) {
    const auto ob = obs.bounding_box();
    const double pad = std::abs(cr.obs_inflate) + cr.ext.clearance;
    if (ob.first.x() > bb.second.x() + pad || ob.second.x() < bb.first.x() - pad ||
        ob.first.y() > bb.second.y() + pad || ob.second.y() < bb.first.y() - pad)
      continue;
    Polygon inflated = obs;
    if (std::abs(cr.obs_inflate) > kEpsGeom) {
      if (auto off = obs.offset(cr.obs_inflate))
        inflated = *off;
      else if (cr.obs_inflate > 0.0)
        throw std::runtime_error("obstacle inflation failed");
      // A failed deflation keeps the raw outline, which is conservative.
    }
    polys.push_back(make_env_polygon(std::move(inflated), EnvKind::Obstacle));
  }

  for (int s = 0; s + 1 < int(trace.nodes.size()); ++s) {
    if (std::abs(s - seg_index) <= 1) continue;  // self and adjacent
    const Segment other(trace.nodes[s], trace.nodes[s + 1]);
    polys.push_back(
        make_env_polygon(build_segment_ura(other, cr.ext.clearance).outer,
                         EnvKind::Obstacle));
  }
  return Environment(std::move(polys));
}

int find_segment(const Trace& trace, const Point& a, const Point& b) {
  for (int s = 0; s + 1 < int(trace.nodes.size()); ++s)
    if (points_equal(trace.nodes[s], a) && points_equal(trace.nodes[s + 1], b))
      return s;
  return -1;
}

}  // namespace

Trace meander_trace(const Trace& trace, double l_target, const Layout& layout,
                    const std::vector<Polygon>& areas, double tolerance,
                    double l_disc, double extra_protect, MeanderStats* stats,
                    bool allow_node_feet) {
  if (trace.nodes.size() < 2) throw std::invalid_argument("trace needs >= 2 nodes");
  const double original = trace_length(trace);
  if (l_target < original - kEpsGeom)
    throw std::invalid_argument("target below the current trace length");

  Trace cur = trace;
  cur.nodes = split_nodes_at_dra_boundaries(layout, cur.nodes);
  double len = trace_length(cur);

  const auto hosts_pattern = [&](const Segment& seg) {
    const ChordRules cr =
        chord_rules(layout, cur, seg, l_disc, extra_protect, allow_node_feet);
    return seg.length() >= 2.0 * cr.ext.d_protect + cr.l_disc - kEpsGeom;
  };

  std::deque<std::pair<Point, Point>> queue;
  for (std::size_t s = 0; s + 1 < cur.nodes.size(); ++s) {
    const Segment seg(cur.nodes[s], cur.nodes[s + 1]);
    if (hosts_pattern(seg)) queue.emplace_back(seg.a, seg.b);
  }

  MeanderStats local;
  while (std::abs(l_target - len) > tolerance && !queue.empty()) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    const int idx = find_segment(cur, a, b);
    if (idx < 0) continue;  // stale entry

    const Segment chord(a, b);
    const ChordRules cr =
        chord_rules(layout, cur, chord, l_disc, extra_protect, allow_node_feet);
    if (chord.length() < cr.l_disc - kEpsGeom) continue;

    const auto env = build_environment(cur, idx, layout, areas, cr);
    if (!env) continue;

    const DiscretizedSegment ds = discretize(chord, cr.l_disc);
    const double need = l_target - len;
    local.segments_processed += 1;
    const DpResult res = dp_extend_segment(*env, ds, need, cr.ext);
    if (res.gain <= kEpsGeom) continue;

    const ApplyResult applied = apply_patterns(ds, res.patterns);
    cur = splice_polyline(cur, idx, applied.polyline);
    len = trace_length(cur);
    local.patterns_inserted += int(res.patterns.size());
    for (const Segment& seg : applied.new_segments)
      if (hosts_pattern(seg)) queue.emplace_back(seg.a, seg.b);
  }

  local.final_length = len;
  local.residual = l_target - len;
  if (stats) *stats = local;
  return cur;
}

}  // namespace lm
