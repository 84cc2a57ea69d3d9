#pragma once

#include <array>
#include <map>
#include <vector>

#include "lm/geom.hpp"
#include "lm/layout.hpp"

namespace lm {

struct Region {
  int id = 0;
  Polygon polygon;
  double capacity = 0.0;       // free area; existing routing excluded
  std::vector<int> neighbors;  // member ids the region can serve
  int dra_id = 0;
};

struct Demand {
  int member_id = 0;
  double required = 0.0;
};

struct Assignment {
  bool feasible = false;
  std::map<std::pair<int, int>, double> alloc;  // (region id, member id)
  double total_required = 0.0;
  double total_assigned = 0.0;
  std::vector<int> deficient_members;
  std::vector<int> saturated_regions;
};

// Decomposes the free space (DRAs minus obstacles minus the envelopes
// of traces outside the matching groups) into axis-aligned slabs of
// pitch <= slab_pitch, with extra cuts at polygon vertices so
// rectilinear fixtures decompose exactly. Demands follow the meander
// area model Req = (dL/2)*(w + d_gap).
std::pair<std::vector<Region>, std::vector<Demand>> build_regions(
    const Layout& layout, double slab_pitch);

// Transportation feasibility as max-flow: source -> region (Cap),
// region -> neighbor member (inf), member -> sink (Req). Feasible iff
// the flow saturates every demand; otherwise the deficient members and
// the saturated regions of the blocking cut are reported.
Assignment solve_assignment(const std::vector<Region>& regions,
                            const std::vector<Demand>& demands);

// Slices each shared region by straight cuts parallel to the dominant
// direction of the traces crossing it; every member's slice contains
// its own polyline portion and roughly matches its allocation. Slices
// of one member are fused into rectilinear polygons.
std::map<int, std::vector<Polygon>> carve_routable_areas(
    const Layout& layout, const std::vector<Region>& regions,
    const Assignment& assignment);

// Union of axis-aligned rectangles {x0, x1, y0, y1} as counterclockwise
// rectilinear polygons; holes are dropped.
std::vector<Polygon> rectilinear_union(
    const std::vector<std::array<double, 4>>& rects);

}  // namespace lm
