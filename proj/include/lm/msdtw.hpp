#pragma once

#include <vector>

#include "lm/geom.hpp"
#include "lm/layout.hpp"

namespace lm {

struct MatchedPair {
  int p_index = 0;
  int n_index = 0;
  double cost = 0.0;
};

// Optimal monotone node matching between the two sub-trace node lists
// (cumulative-cost table with backtracking). Every node appears in at
// least one pair; multiple-to-one matches are allowed.
std::vector<MatchedPair> dtw_match(const std::vector<Point>& nodes_p,
                                   const std::vector<Point>& nodes_n);

// Drops pairs with cost > sqrt(2)*r. Boundary costs are kept.
std::pair<std::vector<MatchedPair>, std::vector<MatchedPair>> filter_unpaired(
    const std::vector<MatchedPair>& pairs, double r);

struct MatchSet {
  std::vector<MatchedPair> pairs;  // kept pairs, indices into the inputs
  // Connected components of the matched-pair graph, ordered along the
  // traversal of trace_P; each lists node indices per side.
  std::vector<std::vector<int>> components_p;
  std::vector<std::vector<int>> components_n;
};

// Multi-scale DTW: match under each rule of the ascending list, filter,
// split the remaining sub-pairs at the matched nodes and drop one-sided
// sub-pairs. Matching never crosses sub-pair boundaries and never
// revisits already-paired nodes.
MatchSet msdtw(const std::vector<Point>& nodes_p,
               const std::vector<Point>& nodes_n,
               const std::vector<double>& rules);

struct MedianTrace {
  Trace trace;  // kind MedianOfPair; width is the pair envelope width
  int pair_id = 0;
  double s_center = 0.0;       // centerline separation of the sub-traces
  double sub_width = 0.0;      // width of each sub-trace
  double extra_protect = 0.0;  // minimum-length widening for virtual DRC
  int p_side = 1;              // +1 when trace_P lies left of the median
  std::vector<Point> breakout_p;
  std::vector<Point> breakout_n;
  double skew_tolerance = 0.0;
};

// Collapses a differential pair onto its median trace with virtual DRC:
// the median carries the pair's envelope width, so the DRA's edge rules
// apply unchanged, and segment minimum lengths widen by s_center to
// absorb offset-corner shortening. Breakout prefixes are preserved
// verbatim for restoration.
MedianTrace merge_to_median(const Layout& layout, const DifferentialPair& pair,
                            const MatchSet& match);

struct RestoredPair {
  std::vector<Point> nodes_p;
  std::vector<Point> nodes_n;
};

// Offsets the tuned median by +-s_center/2 with mitred corner joins,
// reattaches the breakouts and, when the sub-trace lengths differ by
// more than the skew tolerance, compensates with one tiny pattern on
// the shorter sub-trace's longest straight span.
RestoredPair restore_pair(const MedianTrace& median, const Trace& tuned);

}  // namespace lm
