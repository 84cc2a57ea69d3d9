// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lm/msdtw.hpp"
#include "lm/pipeline.hpp"
#include "oracles.hpp"

using namespace lm;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, double seconds,
            const std::string& detail) {
  std::printf("%s  %-28s (%6.2f s) %s\n", pass ? "PASS" : "FAIL", name.c_str(),
              seconds, detail.c_str());
  if (!pass) ++g_failures;
}

void run(const std::string& name, double budget_s,
         const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    pass = false;
    detail += " [over budget " + std::to_string(budget_s) + "s]";
  }
  report(name, pass, secs, detail);
}

std::string fixture(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

Polygon rect(double x0, double x1, double y0, double y1) {
  return Polygon({Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)});
}

Environment make_env(std::vector<std::pair<Polygon, EnvKind>> polys) {
  std::vector<EnvPolygon> eps;
  for (auto& [poly, kind] : polys)
    eps.push_back(make_env_polygon(std::move(poly), kind));
  return Environment(std::move(eps));
}

// Random obstacle scene over a 10-long chord; obstacles keep clear of
// the base URA strip as any DRC-clean input would.
Environment random_scene(std::mt19937& rng, double clearance, double* top_out) {
  std::uniform_real_distribution<double> top(3.0, 14.0), ox(-2.0, 9.0),
      oy(0.0, 10.0), sz(0.8, 3.0);
  std::vector<std::pair<Polygon, EnvKind>> polys;
  const double t = top(rng);
  if (top_out) *top_out = t;
  polys.push_back({rect(-25.0, 35.0, -12.0, t), EnvKind::Border});
  const int n_obs = int(rng() % 4);  // up to 3
  for (int o = 0; o < n_obs; ++o) {
    const double x0 = ox(rng);
    const double y0 = 0.5 * clearance + 0.3 + oy(rng);
    polys.push_back({rect(x0, x0 + sz(rng), y0, y0 + sz(rng)), EnvKind::Obstacle});
  }
  return make_env(std::move(polys));
}

const std::vector<std::string> kTunableFixtures = {
    "minimal.json",        "open_field.json", "pair_field.json",
    "obstacle_field.json", "two_dra.json",    "pair_breakout.json",
    "diagonal.json",       "violation.json"};

// --- Analog generators ------------------------------------------------

// Eight-trace open corridor, target at 200x the gap rule.
Layout corridor8() {
  Layout l;
  const double d_gap = 1.0, width = 0.4;
  l.dras.push_back({1, rect(0, 140, 0, 84), {d_gap, 1.0, 0.5, width}});
  MatchGroup g{1, {}, 200.0, 0.2};
  for (int t = 0; t < 8; ++t) {
    const double y = 6.0 + 10.0 * t;
    l.traces.push_back({t + 1, {Point(20, y), Point(120, y)}, width,
                        TraceKind::SingleEnded});
    g.members.push_back(t + 1);
  }
  l.groups.push_back(g);
  return l;
}

// Via-field corridor: one long trace under a row of vias, solid wall
// above the vias, no room below. The free columns between vias admit
// flexible-width patterns; the fixed-track comb mostly collides.
struct ViaField {
  Layout layout;
  ExtendRules rules;
  Environment env;
  DiscretizedSegment ds;

  ViaField() : ds(discretize(Segment(Point(0, 0), Point(1, 0)), 1.0)) {}
};

ViaField via_field(double ratio) {
  const double width = 0.4;
  const double d_gap = ratio * width;
  const double d_protect = 0.5;
  ViaField vf;
  vf.layout.dras.push_back(
      {1, rect(-10, 120, -4, 20), {d_gap, d_gap, d_protect, width}});
  vf.layout.traces.push_back(
      {1, {Point(0, 0), Point(100, 0)}, width, TraceKind::SingleEnded});

  const double clearance = d_gap + width;
  vf.rules = {clearance, d_protect, true};
  const double inflate = d_gap + 0.5 * width - 0.5 * clearance;

  std::vector<std::pair<Polygon, EnvKind>> polys;
  polys.push_back({rect(-5.0, 110.0, -0.5 * clearance, 8.0), EnvKind::Border});
  for (double x = 0.0; x < 100.0; x += 10.0) {
    vf.layout.obstacles.push_back(rect(x, x + 1.5, 3.0, 4.5));
    polys.push_back(
        {rect(x - inflate, x + 1.5 + inflate, 3.0 - inflate, 4.5 + inflate),
         EnvKind::Obstacle});
  }
  vf.env = make_env(std::move(polys));
  vf.ds = discretize(Segment(Point(0, 0), Point(100, 0)), 0.5 * d_protect);
  return vf;
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");

  run("dp-optimality-vs-oracle", 60.0, [](std::string& detail) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> cl(1.5, 3.0);
    int mismatches = 0;
    for (int iter = 0; iter < 200; ++iter) {
      const double clearance = cl(rng);
      const double protect =
          std::uniform_real_distribution<double>(0.4, clearance * 0.5)(rng);
      const ExtendRules rules{clearance, protect, true};
      const Environment env = random_scene(rng, clearance, nullptr);
      const int intervals = 15 + int(rng() % 15);  // up to 30 points
      const DiscretizedSegment ds =
          discretize(Segment(Point(0, 0), Point(10, 0)), 10.0 / intervals);
      const DpResult res = dp_extend_segment(env, ds, 1e9, rules);
      lm::testing::PlacementOracle oracle(env, ds, 5e8, rules);
      if (std::abs(res.raw_gain - oracle.best_gain()) > 1e-6) ++mismatches;
    }
    detail = std::to_string(mismatches) + "/200 mismatches";
    return mismatches == 0;
  });

  run("height-oracle", 60.0, [](std::string& detail) {
    std::mt19937 rng(4096);
    const double l_disc = 0.5;
    int bad = 0;
    for (int iter = 0; iter < 200; ++iter) {
      const double clearance =
          std::uniform_real_distribution<double>(1.5, 3.0)(rng);
      const ExtendRules rules{clearance, 0.5, true};
      const Environment env = random_scene(rng, clearance, nullptr);
      const DiscretizedSegment ds =
          discretize(Segment(Point(0, 0), Point(10, 0)), l_disc);
      const int g = std::max(1, int(std::ceil(clearance / ds.step - 1e-9)));
      const int w = g + int(rng() % std::max(1, 16 - g));
      const int i = w + int(rng() % (ds.n - w - 1));
      const int dir = 1;
      const double h_req =
          std::uniform_real_distribution<double>(1.0, 14.0)(rng);
      const double impl = max_valid_height(env, ds, i, w, dir, h_req, rules);
      const double scan = lm::testing::height_scan_oracle(env, ds, i, w, dir,
                                                          h_req, rules, l_disc / 4.0);
      if (!lm::testing::height_matches_scan(env, ds, i, w, dir, impl, scan, rules,
                                            l_disc / 4.0))
        ++bad;
    }
    detail = std::to_string(bad) + "/200 beyond l_disc/4";
    return bad == 0;
  });

  run("safety-no-new-violations", 300.0, [](std::string& detail) {
    int dirty = 0, ran = 0;
    std::ostringstream os;
    for (const std::string& name : kTunableFixtures) {
      Layout in = load_layout(fixture(name));
      Layout assigned;
      try {
        assigned = run_assign(in);
      } catch (const InfeasibleAssignment&) {
        continue;
      }
      const Layout tuned = run_tune(assigned, {});
      const auto violations = new_violations(tuned);
      ++ran;
      if (!violations.empty()) {
        ++dirty;
        os << " " << name << ":" << violations.size();
      }
    }
    detail = std::to_string(ran) + " fixtures tuned;" + os.str() +
             (dirty ? "" : " all clean");
    return dirty == 0;
  });

  run("corridor-accuracy", 30.0, [](std::string& detail) {
    const Layout in = corridor8();
    const Layout assigned = run_assign(in);
    TuneReport report;
    const Layout tuned = run_tune(assigned, {}, &report);
    const auto [mx, avg] = group_metrics(tuned.groups[0], tuned);
    std::ostringstream os;
    os << "max " << 100.0 * mx << "%, avg " << 100.0 * avg << "%";
    detail = os.str();
    return mx <= 0.06 && avg <= 0.02;
  });

  run("via-field-ablation", 120.0, [](std::string& detail) {
    std::ostringstream os;
    bool dominated = true;
    double ratio_at_5 = 0.0;
    for (double ratio : {2.5, 3.0, 3.5, 4.0, 4.5, 5.0}) {
      const ViaField vf = via_field(ratio);
      const DpResult res = dp_extend_segment(vf.env, vf.ds, 1e9, vf.rules);
      const int g =
          std::max(1, int(std::ceil(vf.rules.clearance / vf.ds.step - 1e-9)));
      double greedy = 0.0;
      for (int w_mult : {1, 2, 3})
        greedy = std::max(greedy, lm::testing::greedy_fixed_track(
                                      vf.env, vf.ds, 5e8, vf.rules, w_mult * g));
      const double l0 = 100.0;
      os << " " << ratio << ":" << int(100.0 * res.raw_gain / l0) << "%/"
         << int(100.0 * greedy / l0) << "%";
      if (res.raw_gain < greedy - 1e-9) dominated = false;
      if (ratio == 5.0) ratio_at_5 = greedy > 0 ? res.raw_gain / greedy : 1e9;
    }
    detail = "dp/greedy upper bounds:" + os.str();
    return dominated && ratio_at_5 >= 2.0;
  });

  run("dtw-oracle", 30.0, [](std::string& detail) {
    std::mt19937 rng(515);
    std::uniform_real_distribution<double> co(-10.0, 10.0);
    std::uniform_int_distribution<int> len(1, 8);
    int bad = 0;
    for (int iter = 0; iter < 500; ++iter) {
      std::vector<Point> p, n;
      for (int k = len(rng); k > 0; --k) p.emplace_back(co(rng), co(rng));
      for (int k = len(rng); k > 0; --k) n.emplace_back(co(rng), co(rng));
      double total = 0.0;
      for (const MatchedPair& m : dtw_match(p, n)) total += m.cost;
      if (std::abs(total - lm::testing::dtw_enumerate(p, n, 0, 0)) > 1e-9) ++bad;
    }
    detail = std::to_string(bad) + "/500 mismatches";
    return bad == 0;
  });

  run("msdtw-round-trip", 60.0, [](std::string& detail) {
    std::mt19937 rng(606);
    std::uniform_real_distribution<double> step(3.0, 9.0);
    int bad = 0;
    for (int iter = 0; iter < 50; ++iter) {
      // Random rectilinear staircase centerline, perfectly coupled pair.
      std::vector<Point> center = {Point(0, 0)};
      Point dir(1, 0);
      for (int k = 0; k < 5; ++k) {
        center.push_back(center.back() + step(rng) * dir);
        dir = (k % 2 == 0) ? Point(0, 1) : Point(1, 0);
      }
      std::vector<Point> p(center.size()), n(center.size());
      for (std::size_t k = 0; k < center.size(); ++k) {
        Point d = k + 1 < center.size()
                      ? (center[k + 1] - center[k]).normalized()
                      : (center[k] - center[k - 1]).normalized();
        if (k > 0 && k + 1 < center.size()) {
          const Point d0 = (center[k] - center[k - 1]).normalized();
          const Point d1 = (center[k + 1] - center[k]).normalized();
          const Point bis = perp(d0) + perp(d1);
          p[k] = center[k] + 1.0 / bis.dot(perp(d0)) * bis;
          n[k] = center[k] - 1.0 / bis.dot(perp(d0)) * bis;
        } else {
          p[k] = center[k] + perp(d);
          n[k] = center[k] - perp(d);
        }
      }
      Layout l;
      l.dras.push_back({1, rect(-100, 300, -100, 300), {2.0, 2.0, 1.0, 0.4}});
      l.traces.push_back({11, p, 0.4, TraceKind::SingleEnded});
      l.traces.push_back({12, n, 0.4, TraceKind::SingleEnded});
      l.pairs.push_back({2, 11, 12, 1.6, 0, 0});
      const MedianTrace med =
          merge_to_median(l, l.pairs[0], msdtw(p, n, {2.5}));
      const RestoredPair restored = restore_pair(med, med.trace);
      bool ok = restored.nodes_p.size() == p.size() &&
                restored.nodes_n.size() == n.size();
      for (std::size_t k = 0; ok && k < p.size(); ++k)
        ok = dist(restored.nodes_p[k], p[k]) <= kEpsGeom &&
             dist(restored.nodes_n[k], n[k]) <= kEpsGeom;
      if (!ok) ++bad;
    }

    // Two-DRA fixture: the tiny-pattern node stays unpaired through
    // both rounds.
    const std::vector<Point> p = {Point(0, 0.5), Point(4, 1.8), Point(8, 0.5),
                                  Point(12, 2), Point(20, 2)};
    const std::vector<Point> n = {Point(0, -0.5), Point(8, -0.5), Point(12, -2),
                                  Point(20, -2)};
    const MatchSet multi = msdtw(p, n, {1.0, 4.0});
    bool tiny_unpaired = true;
    for (const MatchedPair& m : multi.pairs)
      if (m.p_index == 1) tiny_unpaired = false;
    detail = std::to_string(bad) + "/50 round-trip mismatches; tiny node " +
             (tiny_unpaired ? "unpaired" : "PAIRED");
    return bad == 0 && tiny_unpaired;
  });

  run("assignment-feasibility", 30.0, [](std::string& detail) {
    std::mt19937 rng(717);
    int bad = 0;
    for (int iter = 0; iter < 1000; ++iter) {
      const int nr = 1 + int(rng() % 4), nd = 1 + int(rng() % 4);
      std::vector<Region> regions;
      std::vector<Demand> demands;
      std::vector<long long> caps, reqs;
      std::vector<std::vector<int>> serves(nr);
      for (int d = 0; d < nd; ++d) {
        const long long req = rng() % 15;
        demands.push_back({d + 1, double(req)});
        reqs.push_back(req);
      }
      for (int r = 0; r < nr; ++r) {
        const long long cap = rng() % 15;
        Region reg;
        reg.id = r;
        reg.polygon = rect(10.0 * r, 10.0 * r + 10, 0, 10);
        reg.capacity = double(cap);
        for (int d = 0; d < nd; ++d)
          if (rng() % 2) {
            reg.neighbors.push_back(d + 1);
            serves[r].push_back(d);
          }
        regions.push_back(std::move(reg));
        caps.push_back(cap);
      }
      if (solve_assignment(regions, demands).feasible !=
          lm::testing::hall_feasible(caps, reqs, serves))
        ++bad;
    }
    detail = std::to_string(bad) + "/1000 mismatches";
    return bad == 0;
  });

  run("spatial-index", 30.0, [](std::string& detail) {
    std::mt19937 rng(818);
    std::uniform_real_distribution<double> co(-100.0, 100.0);
    std::vector<std::pair<Point, int>> pts;
    for (int k = 0; k < 800; ++k) pts.emplace_back(Point(co(rng), co(rng)), k % 13);
    const PointIndex idx = build_index(pts);
    int bad = 0;
    for (int q = 0; q < 10000; ++q) {
      double x0 = co(rng), x1 = co(rng), y0 = co(rng), y1 = co(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      std::size_t expect = 0;
      for (const auto& [p, id] : pts)
        if (p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1) ++expect;
      if (idx.range_query(x0, x1, y0, y1).size() != expect) ++bad;
    }
    detail = std::to_string(bad) + "/10000 mismatches";
    return bad == 0;
  });

  run("determinism-across-threads", 300.0, [](std::string& detail) {
    int compared = 0, differing = 0;
    for (const std::string& name : kTunableFixtures) {
      Layout in = load_layout(fixture(name));
      Layout assigned;
      try {
        assigned = run_assign(in);
      } catch (const InfeasibleAssignment&) {
        continue;
      }
      TuneOptions one;
      one.threads = 1;
      TuneOptions four;
      four.threads = 4;
      const std::string a = layout_to_json(run_tune(assigned, one));
      const std::string b = layout_to_json(run_tune(assigned, four));
      ++compared;
      if (a != b) ++differing;
    }
    detail = std::to_string(compared) + " fixtures, " +
             std::to_string(differing) + " differing";
    return compared > 0 && differing == 0;
  });

  std::printf("%d criterion failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
