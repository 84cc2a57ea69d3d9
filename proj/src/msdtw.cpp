#include "lm/msdtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace lm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool cost_matches(double pred, double d, double cell) {
  return std::abs(pred + d - cell) <= 1e-9 * std::max(1.0, std::abs(cell));
}

}  // namespace

std::vector<MatchedPair> dtw_match(const std::vector<Point>& nodes_p,
                                   const std::vector<Point>& nodes_n) {
  const int I = int(nodes_p.size());
  const int J = int(nodes_n.size());
  if (I == 0 || J == 0) throw std::invalid_argument("dtw_match on empty node list");

  std::vector<std::vector<double>> C(I + 1, std::vector<double>(J + 1, kInf));
  C[0][0] = 0.0;
  for (int i = 1; i <= I; ++i) {
    for (int j = 1; j <= J; ++j) {
      const double d = dist(nodes_p[i - 1], nodes_n[j - 1]);
      const double pred =
          std::min(C[i - 1][j - 1], std::min(C[i - 1][j], C[i][j - 1]));
      if (pred < kInf) C[i][j] = pred + d;
    }
  }

  std::vector<MatchedPair> pairs;
  int i = I, j = J;
  while (i != 0 || j != 0) {
    const double d = dist(nodes_p[i - 1], nodes_n[j - 1]);
    pairs.push_back({i - 1, j - 1, d});
    if (i > 1 && j > 1 && cost_matches(C[i - 1][j - 1], d, C[i][j])) {
      --i;
      --j;
    } else if (i > 1 && cost_matches(C[i - 1][j], d, C[i][j])) {
      --i;
    } else if (j > 1 && cost_matches(C[i][j - 1], d, C[i][j])) {
      --j;
    } else {
      break;  // at (1,1): predecessor is C[0][0]
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

std::pair<std::vector<MatchedPair>, std::vector<MatchedPair>> filter_unpaired(
    const std::vector<MatchedPair>& pairs, double r) {
  if (r <= 0.0) throw std::invalid_argument("distance rule must be positive");
  const double bound = std::sqrt(2.0) * r;
  std::vector<MatchedPair> kept, dropped;
  for (const MatchedPair& p : pairs) {
    if (p.cost > bound + kEpsGeom)
      dropped.push_back(p);
    else
      kept.push_back(p);
  }
  return {std::move(kept), std::move(dropped)};
}

namespace {

struct SubPair {
  int p_lo, p_hi, n_lo, n_hi;  // inclusive index ranges; empty when lo > hi
};

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

MatchSet msdtw(const std::vector<Point>& nodes_p,
               const std::vector<Point>& nodes_n,
               const std::vector<double>& rules) {
  if (rules.empty()) throw std::invalid_argument("msdtw needs a non-empty rule set");
  if (!std::is_sorted(rules.begin(), rules.end()))
    throw std::invalid_argument("msdtw rules must be ascending");

  MatchSet out;
  std::vector<SubPair> subs;
  if (!nodes_p.empty() && !nodes_n.empty())
    subs.push_back({0, int(nodes_p.size()) - 1, 0, int(nodes_n.size()) - 1});

  for (double r : rules) {
    std::vector<SubPair> next;
    for (const SubPair& sub : subs) {
      if (sub.p_lo > sub.p_hi || sub.n_lo > sub.n_hi) continue;
      const std::vector<Point> sp(nodes_p.begin() + sub.p_lo,
                                  nodes_p.begin() + sub.p_hi + 1);
      const std::vector<Point> sn(nodes_n.begin() + sub.n_lo,
                                  nodes_n.begin() + sub.n_hi + 1);
      auto [kept, dropped] = filter_unpaired(dtw_match(sp, sn), r);
      for (MatchedPair& m : kept) {
        m.p_index += sub.p_lo;
        m.n_index += sub.n_lo;
        out.pairs.push_back(m);
      }
      if (kept.empty()) {
        next.push_back(sub);  // retried under the next (larger) rule
        continue;
      }
      // Split at the matched nodes; one-sided gaps hold only the noise
      // of tiny patterns and are dropped for good. kept is already in
      // global indices here.
      int prev_p = sub.p_lo - 1, prev_n = sub.n_lo - 1;
      std::vector<SubPair> gaps;
      for (const MatchedPair& m : kept) {
        gaps.push_back({prev_p + 1, m.p_index - 1, prev_n + 1, m.n_index - 1});
        prev_p = m.p_index;
        prev_n = m.n_index;
      }
      gaps.push_back({prev_p + 1, sub.p_hi, prev_n + 1, sub.n_hi});
      for (const SubPair& gcand : gaps) {
        const bool has_p = gcand.p_lo <= gcand.p_hi;
        const bool has_n = gcand.n_lo <= gcand.n_hi;
        if (has_p && has_n) next.push_back(gcand);
      }
    }
    subs = std::move(next);
  }

  // Connected components over the kept pairs, ordered along trace_P.
  const int np = int(nodes_p.size());
  const int nn = int(nodes_n.size());
  DisjointSet ds(np + nn);
  for (const MatchedPair& m : out.pairs) ds.unite(m.p_index, np + m.n_index);

  std::map<int, std::pair<std::vector<int>, std::vector<int>>> comps;
  for (const MatchedPair& m : out.pairs) {
    auto& c = comps[ds.find(m.p_index)];
    c.first.push_back(m.p_index);
    c.second.push_back(m.n_index);
  }
  std::vector<std::pair<int, int>> order;  // (min p index, root)
  for (auto& [root, c] : comps) {
    std::sort(c.first.begin(), c.first.end());
    c.first.erase(std::unique(c.first.begin(), c.first.end()), c.first.end());
    std::sort(c.second.begin(), c.second.end());
    c.second.erase(std::unique(c.second.begin(), c.second.end()), c.second.end());
    order.emplace_back(c.first.front(), root);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [min_p, root] : order) {
    out.components_p.push_back(comps[root].first);
    out.components_n.push_back(comps[root].second);
  }
  return out;
}

namespace {

Point mean_of(const std::vector<Point>& nodes, const std::vector<int>& idx) {
  Point sum = Point::Zero();
  for (int k : idx) sum += nodes[k];
  return sum / double(idx.size());
}

}  // namespace

MedianTrace merge_to_median(const Layout& layout, const DifferentialPair& pair,
                            const MatchSet& match) {
  if (match.components_p.empty())
    throw std::runtime_error("pair " + std::to_string(pair.id) +
                             " is too decoupled to merge");
  const Trace* tp = layout.find_trace(pair.trace_p);
  const Trace* tn = layout.find_trace(pair.trace_n);
  if (!tp || !tn) throw std::runtime_error("pair references missing trace");

  const std::vector<Point> mp(tp->nodes.begin() + pair.breakout_p, tp->nodes.end());
  const std::vector<Point> mn(tn->nodes.begin() + pair.breakout_n, tn->nodes.end());

  MedianTrace med;
  med.pair_id = pair.id;
  med.sub_width = tp->width;
  med.s_center = pair.gap + tp->width;
  med.extra_protect = med.s_center;
  med.breakout_p.assign(tp->nodes.begin(), tp->nodes.begin() + pair.breakout_p);
  med.breakout_n.assign(tn->nodes.begin(), tn->nodes.begin() + pair.breakout_n);

  med.trace.id = pair.id;
  med.trace.kind = TraceKind::MedianOfPair;
  med.trace.width = med.s_center + tp->width;  // pair envelope
  for (std::size_t c = 0; c < match.components_p.size(); ++c) {
    const Point pm = 0.5 * (mean_of(mp, match.components_p[c]) +
                            mean_of(mn, match.components_n[c]));
    if (med.trace.nodes.empty() || !points_equal(med.trace.nodes.back(), pm))
      med.trace.nodes.push_back(pm);
  }
  if (med.trace.nodes.size() < 2)
    throw std::runtime_error("pair " + std::to_string(pair.id) +
                             " merges to fewer than 2 median nodes");

  // Which side of the median does trace_P run on?
  const Point dir0 =
      (med.trace.nodes[1] - med.trace.nodes[0]).normalized();
  const Point rel = mp[match.components_p.front().front()] - med.trace.nodes.front();
  med.p_side = perp(dir0).dot(rel) >= 0.0 ? 1 : -1;

  const RuleSet& rules = layout.dra_at(med.trace.nodes.front()).rules;
  med.skew_tolerance = rules.d_protect;
  return med;
}

namespace {

std::vector<Point> offset_polyline(const std::vector<Point>& nodes, double delta) {
  const std::size_t n = nodes.size();
  std::vector<Point> out(n);
  const auto left_normal = [](const Point& a, const Point& b) {
    return perp((b - a).normalized());
  };
  out[0] = nodes[0] + delta * left_normal(nodes[0], nodes[1]);
  out[n - 1] = nodes[n - 1] + delta * left_normal(nodes[n - 2], nodes[n - 1]);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Point n0 = left_normal(nodes[k - 1], nodes[k]);
    const Point n1 = left_normal(nodes[k], nodes[k + 1]);
    const Point bis = n0 + n1;
    const double denom = bis.dot(n0);
    if (std::abs(denom) < 1e-9)
      out[k] = nodes[k] + delta * n0;
    else
      out[k] = nodes[k] + delta / denom * bis;
  }
  // Mitring an inner corner can consume a short segment entirely.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Point d_orig = nodes[k + 1] - nodes[k];
    const Point d_off = out[k + 1] - out[k];
    if (d_off.dot(d_orig) <= kEpsGeom)
      throw std::runtime_error("pair offset self-intersects at corner " +
                               std::to_string(k));
  }
  return out;
}

void append_nodes(std::vector<Point>& dst, const std::vector<Point>& src) {
  for (const Point& p : src)
    if (dst.empty() || !points_equal(dst.back(), p)) dst.push_back(p);
}

// One compensating detour of the given height on the longest segment of
// the polyline, opening away from the sibling polyline.
void insert_tiny_pattern(std::vector<Point>& nodes, double height, double width,
                         const std::vector<Point>& sibling) {
  std::size_t best = 0;
  double best_len = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double len = dist(nodes[k], nodes[k + 1]);
    if (len > best_len) {
      best_len = len;
      best = k;
    }
  }
  if (best_len < width + 2.0 * kEpsGeom) return;  // nowhere to put it
  const Point a = nodes[best], b = nodes[best + 1];
  const Point u = (b - a).normalized();
  const Point mid = 0.5 * (a + b);
  Point nrm = perp(u);
  double side = 0.0;
  for (const Point& s : sibling) side += nrm.dot(s - mid);
  if (side > 0.0) nrm = -nrm;  // open away from the sibling
  const Point f1 = mid - 0.5 * width * u;
  const Point f2 = mid + 0.5 * width * u;
  std::vector<Point> detour = {f1, f1 + height * nrm, f2 + height * nrm, f2};
  nodes.insert(nodes.begin() + best + 1, detour.begin(), detour.end());
}

}  // namespace

RestoredPair restore_pair(const MedianTrace& median, const Trace& tuned) {
  const double half = 0.5 * median.s_center;
  RestoredPair out;
  std::vector<Point> off_p = offset_polyline(tuned.nodes, median.p_side * half);
  std::vector<Point> off_n = offset_polyline(tuned.nodes, -median.p_side * half);

  append_nodes(out.nodes_p, median.breakout_p);
  append_nodes(out.nodes_p, off_p);
  append_nodes(out.nodes_n, median.breakout_n);
  append_nodes(out.nodes_n, off_n);

  const double lp = polyline_length(out.nodes_p);
  const double ln = polyline_length(out.nodes_n);
  const double skew = std::abs(lp - ln);
  if (skew > median.skew_tolerance + kEpsGeom) {
    const double width = std::max(median.skew_tolerance, kEpsGeom * 10.0);
    if (lp < ln)
      insert_tiny_pattern(out.nodes_p, 0.5 * skew, width, out.nodes_n);
    else
      insert_tiny_pattern(out.nodes_n, 0.5 * skew, width, out.nodes_p);
  }
  return out;
}

}  // namespace lm
