#include <doctest.h>

#include <random>

#include "lm/assign.hpp"
#include "oracles.hpp"

using namespace lm;

namespace {

Region make_region(int id, double x0, double x1, double y0, double y1,
                   double cap, std::vector<int> neighbors) {
  Region r;
  r.id = id;
  r.polygon = Polygon({Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)});
  r.capacity = cap;
  r.neighbors = std::move(neighbors);
  r.dra_id = 1;
  return r;
}

Layout board_with_trace(double target) {
  Layout l;
  l.dras.push_back({1,
                    Polygon({Point(0, 0), Point(100, 0), Point(100, 100), Point(0, 100)}),
                    {2.0, 2.0, 1.0, 1.0}});
  l.traces.push_back({1, {Point(10, 20), Point(90, 20)}, 1.0, TraceKind::SingleEnded});
  l.groups.push_back({1, {1}, target, 0.1});
  return l;
}

}  // namespace

TEST_CASE("demand follows the meander area model") {
  // dL=20, w=1, d_gap=2 -> Req = 10 * 3 = 30.
  const Layout l = board_with_trace(100.0);
  auto [regions, demands] = build_regions(l, 1000.0);
  REQUIRE(demands.size() == 1);
  CHECK(demands[0].required == doctest::Approx(0.5 * 20.0 * (1.0 + 2.0)));
}

TEST_CASE("zero extension means zero demand and trivial feasibility") {
  const Layout l = board_with_trace(80.0);  // already at target
  auto [regions, demands] = build_regions(l, 1000.0);
  REQUIRE(demands.size() == 1);
  CHECK(demands[0].required == doctest::Approx(0.0));
  CHECK(solve_assignment(regions, demands).feasible);
}

TEST_CASE("capacity bookkeeping excludes obstacles and trace inflation") {
  Layout l = board_with_trace(100.0);
  l.obstacles.push_back(
      Polygon({Point(40, 60), Point(60, 60), Point(60, 80), Point(40, 80)}));
  auto [regions, demands] = build_regions(l, 7.0);
  double total_cap = 0.0;
  double total_area = 0.0;
  for (const Region& r : regions) {
    total_cap += r.capacity;
    total_area += r.polygon.area();
  }
  // Free slab area: the board minus the obstacle (the member trace's
  // envelope stays inside the regions).
  CHECK(total_area == doctest::Approx(10000.0 - 400.0));
  // Capacity additionally excludes the trace envelope, 80 * (1 + 2).
  CHECK(total_cap == doctest::Approx(10000.0 - 400.0 - 80.0 * 3.0));
}

TEST_CASE("single region examples") {
  const std::vector<Region> regions = {make_region(0, 0, 10, 0, 10, 10.0, {1})};
  Assignment a = solve_assignment(regions, {{1, 8.0}});
  CHECK(a.feasible);
  CHECK(a.alloc.at({0, 1}) == doctest::Approx(8.0));

  Assignment b = solve_assignment(regions, {{1, 12.0}});
  CHECK_FALSE(b.feasible);
  CHECK(b.total_required - b.total_assigned == doctest::Approx(2.0));
  REQUIRE(b.deficient_members.size() == 1);
  CHECK(b.deficient_members[0] == 1);
  REQUIRE(b.saturated_regions.size() == 1);
}

TEST_CASE("forced split across two regions") {
  // Region 0 (cap 5) serves only member 1; region 1 (cap 5) serves both.
  // Req {6, 4} forces x01=5, x11=1, x12=4.
  const std::vector<Region> regions = {make_region(0, 0, 10, 0, 10, 5.0, {1}),
                                       make_region(1, 10, 20, 0, 10, 5.0, {1, 2})};
  const Assignment a = solve_assignment(regions, {{1, 6.0}, {2, 4.0}});
  REQUIRE(a.feasible);
  CHECK(a.alloc.at({0, 1}) == doctest::Approx(5.0));
  CHECK(a.alloc.at({1, 1}) == doctest::Approx(1.0));
  CHECK(a.alloc.at({1, 2}) == doctest::Approx(4.0));
}

TEST_CASE("flow conservation when feasible") {
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> cap(0, 20);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Region> regions;
    std::vector<Demand> demands;
    const int nr = 1 + int(rng() % 4), nd = 1 + int(rng() % 4);
    for (int d = 0; d < nd; ++d) demands.push_back({d + 1, double(cap(rng)) / 2.0});
    for (int r = 0; r < nr; ++r) {
      std::vector<int> nbr;
      for (int d = 0; d < nd; ++d)
        if (rng() % 2) nbr.push_back(d + 1);
      regions.push_back(make_region(r, 10.0 * r, 10.0 * r + 10, 0, 10,
                                    double(cap(rng)), std::move(nbr)));
    }
    const Assignment a = solve_assignment(regions, demands);
    if (!a.feasible) continue;
    double sum = 0.0;
    for (const auto& [key, v] : a.alloc) {
      CHECK(v >= -1e-9);
      sum += v;
    }
    CHECK(sum == doctest::Approx(a.total_required));
    // Per-region capacity and per-member demand constraints.
    for (const Region& r : regions) {
      double used = 0.0;
      for (const Demand& d : demands)
        if (a.alloc.count({r.id, d.member_id})) used += a.alloc.at({r.id, d.member_id});
      CHECK(used <= r.capacity + 1e-9);
    }
  }
}

TEST_CASE("feasibility agrees with the Hall-condition oracle") {
  std::mt19937 rng(37);
  for (int iter = 0; iter < 300; ++iter) {
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
      std::vector<int> nbr;
      for (int d = 0; d < nd; ++d)
        if (rng() % 2) {
          nbr.push_back(d + 1);
          serves[r].push_back(d);
        }
      regions.push_back(make_region(r, 10.0 * r, 10.0 * r + 10, 0, 10,
                                    double(cap), std::move(nbr)));
      caps.push_back(cap);
    }
    CHECK(solve_assignment(regions, demands).feasible ==
          lm::testing::hall_feasible(caps, reqs, serves));
  }
}

TEST_CASE("carve gives a sole user the whole region") {
  Layout l = board_with_trace(100.0);
  auto [regions, demands] = build_regions(l, 1000.0);
  const Assignment a = solve_assignment(regions, demands);
  REQUIRE(a.feasible);
  const auto areas = carve_routable_areas(l, regions, a);
  REQUIRE(areas.count(1));
  double area = 0.0;
  for (const Polygon& p : areas.at(1)) area += p.area();
  double regions_area = 0.0;
  for (const Region& r : regions) regions_area += r.polygon.area();
  CHECK(area == doctest::Approx(regions_area));
  // The trace's own polyline is inside its area.
  for (const Point& p : l.traces[0].nodes) {
    bool inside = false;
    for (const Polygon& poly : areas.at(1))
      if (point_in_polygon(p, poly) != Containment::Outside) inside = true;
    CHECK(inside);
  }
}

TEST_CASE("symmetric 50/50 carve cuts through the middle") {
  Layout l;
  l.dras.push_back({1,
                    Polygon({Point(0, 0), Point(10, 0), Point(10, 10), Point(0, 10)}),
                    {1.0, 1.0, 0.5, 0.5}});
  l.traces.push_back({1, {Point(1, 3), Point(9, 3)}, 0.5, TraceKind::SingleEnded});
  l.traces.push_back({2, {Point(1, 7), Point(9, 7)}, 0.5, TraceKind::SingleEnded});
  l.groups.push_back({1, {1, 2}, 20.0, 0.1});

  const std::vector<Region> regions = {make_region(0, 0, 10, 0, 10, 100.0, {1, 2})};
  Assignment a;
  a.feasible = true;
  a.alloc[{0, 1}] = 20.0;
  a.alloc[{0, 2}] = 20.0;
  const auto areas = carve_routable_areas(l, regions, a);
  REQUIRE(areas.count(1));
  REQUIRE(areas.count(2));
  const auto bb1 = areas.at(1).front().bounding_box();
  const auto bb2 = areas.at(2).front().bounding_box();
  CHECK(bb1.second.y() == doctest::Approx(5.0));
  CHECK(bb2.first.y() == doctest::Approx(5.0));
}

TEST_CASE("60/40 share cuts at the matching height") {
  // Members do not cross the region, so the shares are pure allocation.
  Layout l;
  l.dras.push_back({1,
                    Polygon({Point(0, 0), Point(30, 0), Point(30, 10), Point(0, 10)}),
                    {1.0, 1.0, 0.5, 0.5}});
  l.traces.push_back({1, {Point(12, 2), Point(20, 2)}, 0.5, TraceKind::SingleEnded});
  l.traces.push_back({2, {Point(12, 8), Point(20, 8)}, 0.5, TraceKind::SingleEnded});
  l.groups.push_back({1, {1, 2}, 20.0, 0.1});

  const std::vector<Region> regions = {make_region(0, 0, 10, 0, 10, 100.0, {1, 2})};
  Assignment a;
  a.feasible = true;
  a.alloc[{0, 1}] = 60.0;
  a.alloc[{0, 2}] = 40.0;
  const auto areas = carve_routable_areas(l, regions, a);
  const auto bb1 = areas.at(1).front().bounding_box();
  const auto bb2 = areas.at(2).front().bounding_box();
  CHECK(areas.at(1).front().area() == doctest::Approx(60.0));
  CHECK(areas.at(2).front().area() == doctest::Approx(40.0));
  CHECK(bb1.second.y() == doctest::Approx(6.0));
  CHECK(bb2.first.y() == doctest::Approx(6.0));
}

TEST_CASE("carved areas are interior-disjoint and inside the regions") {
  Layout l;
  l.dras.push_back({1,
                    Polygon({Point(0, 0), Point(60, 0), Point(60, 40), Point(0, 40)}),
                    {2.0, 2.0, 1.0, 0.5}});
  l.traces.push_back({1, {Point(5, 10), Point(55, 10)}, 0.5, TraceKind::SingleEnded});
  l.traces.push_back({2, {Point(5, 20), Point(55, 20)}, 0.5, TraceKind::SingleEnded});
  l.traces.push_back({3, {Point(5, 30), Point(55, 30)}, 0.5, TraceKind::SingleEnded});
  l.groups.push_back({1, {1, 2, 3}, 90.0, 0.1});
  auto [regions, demands] = build_regions(l, 15.0);
  const Assignment a = solve_assignment(regions, demands);
  REQUIRE(a.feasible);
  const auto areas = carve_routable_areas(l, regions, a);

  std::mt19937 rng(53);
  std::uniform_real_distribution<double> cx(0.0, 60.0), cy(0.0, 40.0);
  for (int k = 0; k < 2000; ++k) {
    const Point q(cx(rng), cy(rng));
    int owners = 0;
    for (const auto& [id, polys] : areas)
      for (const Polygon& poly : polys)
        if (point_in_polygon(q, poly) == Containment::Inside) ++owners;
    CHECK(owners <= 1);
  }
  // Containment of the original polylines.
  for (const Trace& t : l.traces) {
    for (const Point& p : t.nodes) {
      bool inside = false;
      for (const Polygon& poly : areas.at(t.id))
        if (point_in_polygon(p, poly) != Containment::Outside) inside = true;
      CHECK(inside);
    }
  }
}
