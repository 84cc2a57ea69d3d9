#include <doctest.h>

#include <cstdio>
#include <random>

#include "lm/pipeline.hpp"
#include "lm/render.hpp"

using namespace lm;

namespace {

std::string fixture(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("assign populates routable areas on the open field") {
  const Layout in = load_layout(fixture("open_field.json"));
  const Layout out = run_assign(in);
  REQUIRE(out.routable_areas.count(1));
  // The trace's polyline is inside its area.
  for (const Point& p : out.traces[0].nodes) {
    bool inside = false;
    for (const Polygon& poly : out.routable_areas.at(1))
      if (point_in_polygon(p, poly) != Containment::Outside) inside = true;
    CHECK(inside);
  }
  // Assignment is idempotent at the byte level.
  const std::string once = layout_to_json(out);
  const std::string twice = layout_to_json(run_assign(layout_from_json(once)));
  CHECK(once == twice);
}

TEST_CASE("assign fails fast with a certificate when infeasible") {
  const Layout in = load_layout(fixture("infeasible.json"));
  try {
    run_assign(in);
    FAIL("expected infeasibility");
  } catch (const InfeasibleAssignment& e) {
    CHECK_FALSE(e.certificate.feasible);
    REQUIRE_FALSE(e.certificate.deficient_members.empty());
    CHECK(e.certificate.deficient_members[0] == 1);
  }
}

TEST_CASE("tune leaves an already-matched group untouched") {
  const Layout in = load_layout(fixture("minimal.json"));
  const Layout assigned = run_assign(in);
  TuneReport report;
  const Layout tuned = run_tune(assigned, {}, &report);
  REQUIRE(report.groups.size() == 1);
  CHECK(report.groups[0].max_error == doctest::Approx(0.0));
  CHECK(layout_to_json(tuned) == layout_to_json(assigned));
}

TEST_CASE("tune reaches the target on the open field") {
  const Layout in = load_layout(fixture("open_field.json"));
  const Layout assigned = run_assign(in);
  TuneReport report;
  const Layout tuned = run_tune(assigned, {}, &report);
  const double len = trace_length(*tuned.find_trace(1));
  CHECK(len == doctest::Approx(150.0).epsilon(0.005));
  CHECK(new_violations(tuned).empty());
}

TEST_CASE("tune merges and restores the differential pair") {
  const Layout in = load_layout(fixture("pair_field.json"));
  const Layout assigned = run_assign(in);
  TuneReport report;
  const Layout tuned = run_tune(assigned, {}, &report);
  const double lp = trace_length(*tuned.find_trace(11));
  const double ln = trace_length(*tuned.find_trace(12));
  CHECK(0.5 * (lp + ln) == doctest::Approx(150.0).epsilon(0.01));
  CHECK(std::abs(lp - ln) <= 1.0 + 1e-6);  // intra-pair skew tolerance
  CHECK(new_violations(tuned).empty());
}

TEST_CASE("tune routes around obstacles and stays clean") {
  const Layout in = load_layout(fixture("obstacle_field.json"));
  const Layout assigned = run_assign(in);
  TuneReport report;
  const Layout tuned = run_tune(assigned, {}, &report);
  const double len = trace_length(*tuned.find_trace(1));
  CHECK(len == doctest::Approx(160.0).epsilon(0.02));
  const auto violations = new_violations(tuned);
  for (const auto& v : violations) MESSAGE(v.describe());
  CHECK(violations.empty());
}

TEST_CASE("a chord crossing two DRAs is tuned per-DRA and stays clean") {
  const Layout in = load_layout(fixture("two_dra.json"));
  const Layout assigned = run_assign(in);
  const Layout tuned = run_tune(assigned, {});
  CHECK(trace_length(*tuned.find_trace(1)) == doctest::Approx(170.0).epsilon(0.005));
  const auto violations = new_violations(tuned);
  for (const auto& v : violations) MESSAGE(v.describe());
  CHECK(violations.empty());
  // Pattern legs left of the boundary may sit closer than the wide-rule
  // minimum; right of it they must honor the wider gap (3 + width).
  const Trace& t = *tuned.find_trace(1);
  for (std::size_t a = 0; a + 1 < t.nodes.size(); ++a) {
    const Segment sa(t.nodes[a], t.nodes[a + 1]);
    if (std::abs(sa.a.x() - sa.b.x()) > 1e-9) continue;  // legs only
    if (sa.a.x() < 60.0) continue;
    for (std::size_t b = a + 2; b + 1 < t.nodes.size(); ++b) {
      const Segment sb(t.nodes[b], t.nodes[b + 1]);
      if (std::abs(sb.a.x() - sb.b.x()) > 1e-9) continue;
      if (points_equal(sa.a, sb.a) || points_equal(sa.a, sb.b) ||
          points_equal(sa.b, sb.a) || points_equal(sa.b, sb.b))
        continue;
      const bool same_side = (sa.a.y() - 20.0) * (sb.a.y() - 20.0) > 0.0 ||
                             (sa.b.y() - 20.0) * (sb.b.y() - 20.0) > 0.0;
      if (same_side && sb.a.x() > 60.0)
        CHECK(std::abs(sa.a.x() - sb.a.x()) >= 3.4 - 1e-6);
    }
  }
}

TEST_CASE("pair breakouts are preserved through the pipeline") {
  const Layout in = load_layout(fixture("pair_breakout.json"));
  const Layout assigned = run_assign(in);
  const Layout tuned = run_tune(assigned, {});
  CHECK(dist(tuned.find_trace(11)->nodes.front(), Point(10, 60)) < 1e-9);
  CHECK(dist(tuned.find_trace(12)->nodes.front(), Point(10, 40)) < 1e-9);
  const double lp = trace_length(*tuned.find_trace(11));
  const double ln = trace_length(*tuned.find_trace(12));
  CHECK(0.5 * (lp + ln) == doctest::Approx(160.0).epsilon(0.01));
  CHECK(new_violations(tuned).empty());
}

TEST_CASE("thread count does not change the output bytes") {
  for (const char* name : {"open_field.json", "pair_field.json"}) {
    const Layout assigned = run_assign(load_layout(fixture(name)));
    TuneOptions one;
    one.threads = 1;
    TuneOptions four;
    four.threads = 4;
    CHECK(layout_to_json(run_tune(assigned, one)) ==
          layout_to_json(run_tune(assigned, four)));
  }
}

TEST_CASE("random multi-trace boards tune cleanly") {
  std::mt19937 rng(271828);
  std::uniform_real_distribution<double> oxy(10.0, 150.0), osz(3.0, 10.0),
      stretch(1.2, 2.2);
  for (int iter = 0; iter < 5; ++iter) {
    Layout l;
    l.dras.push_back({1,
                      Polygon({Point(0, 0), Point(180, 0), Point(180, 90), Point(0, 90)}),
                      {2.0, 2.0, 1.0, 0.4}});
    MatchGroup g{1, {}, 0.0, 0.2};
    double longest = 0.0;
    for (int t = 0; t < 3; ++t) {
      const double y = 20.0 + 25.0 * t;
      const double x1 = 100.0 + 40.0 * std::uniform_real_distribution<double>(0, 1)(rng);
      l.traces.push_back({t + 1, {Point(15, y), Point(x1, y)}, 0.4,
                          TraceKind::SingleEnded});
      longest = std::max(longest, x1 - 15.0);
      g.members.push_back(t + 1);
    }
    // A few obstacles between the trace rows.
    for (int o = 0; o < 2; ++o) {
      const double x0 = oxy(rng);
      const double y0 = 30.0 + 25.0 * o;
      l.obstacles.push_back(Polygon({Point(x0, y0), Point(x0 + osz(rng), y0),
                                     Point(x0 + osz(rng), y0 + 4.0),
                                     Point(x0, y0 + 4.0)}));
    }
    g.target_length = longest * stretch(rng);
    l.groups.push_back(g);
    validate_layout(l);

    Layout assigned;
    try {
      assigned = run_assign(l);
    } catch (const InfeasibleAssignment&) {
      continue;  // unlucky draw; the generator aims for feasible boards
    }
    const Layout tuned = run_tune(assigned, {});
    const auto [mx, avg] = group_metrics(tuned.groups[0], tuned);
    CHECK(mx <= 0.05);
    const auto violations = new_violations(tuned);
    for (const auto& v : violations) MESSAGE(v.describe());
    CHECK(violations.empty());
  }
}

TEST_CASE("render is deterministic and draws every element") {
  const Layout in = load_layout(fixture("minimal.json"));
  const std::string svg = render_svg(in);
  CHECK(count_occurrences(svg, "<polyline") == 1);
  CHECK(count_occurrences(svg, "class=\"dra\"") == 1);
  CHECK(render_svg(in) == svg);

  const Layout obs = load_layout(fixture("obstacle_field.json"));
  const std::string svg2 = render_svg(obs);
  CHECK(count_occurrences(svg2, "class=\"obstacle\"") == 3);
  CHECK(count_occurrences(svg2, "<polyline") == 1);

  RenderOptions opts;
  opts.ura_overlay = true;
  CHECK(count_occurrences(render_svg(obs, opts), "class=\"ura\"") == 1);
}
