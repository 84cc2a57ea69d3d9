#pragma once

#include <array>
#include <vector>

#include "lm/geom.hpp"
#include "lm/layout.hpp"
#include "lm/spatial.hpp"

namespace lm {

// Chord discretization. points[0] and points[n-1] are the exact segment
// endpoints; the step is adjusted so the segment divides evenly.
struct DiscretizedSegment {
  Segment base;
  std::vector<Point> points;
  double step = 0.0;
  int n = 0;
};

DiscretizedSegment discretize(const Segment& seg, double l_disc);

enum class EnvKind { Border, Obstacle };

struct EnvPolygon {
  Polygon poly;
  EnvKind kind;
  std::pair<Point, Point> bbox;
};

// Geometry a segment extension must respect: the routable-area border,
// inflated obstacles, and the URAs of the trace's other segments and
// committed patterns. The point index accelerates the node-position
// checks of the height shrinking.
class Environment {
 public:
  Environment() = default;
  explicit Environment(std::vector<EnvPolygon> polygons);

  const std::vector<EnvPolygon>& polygons() const { return polys_; }
  const PointIndex& index() const { return index_; }

 private:
  std::vector<EnvPolygon> polys_;
  PointIndex index_;
};

EnvPolygon make_env_polygon(Polygon poly, EnvKind kind);

// Clearances in centerline units: clearance = d_gap + trace width.
// Median traces disallow node-footed patterns: a pattern hanging off a
// trace end has an odd corner count, which breaks the length symmetry
// of the restored pair offsets.
struct ExtendRules {
  double clearance = 0.0;
  double d_protect = 0.0;
  bool allow_node_feet = true;
};

// Maximum valid height of a pattern with feet points[i-w], points[i] in
// direction dir, obtained by shrinking the candidate URA against the
// environment. Heights below d_protect collapse to zero (the pattern
// legs are trace segments and must honor the minimum segment length).
double max_valid_height(const Environment& env, const DiscretizedSegment& ds,
                        int i, int w, int dir, double h_request,
                        const ExtendRules& rules);

struct Pattern {
  int foot_left = 0;
  int foot_right = 0;
  int width_steps = 0;
  double height = 0.0;
  int dir = 1;
};

struct TransitRecord {
  int from_i = -1;
  int from_dir = 0;   // 0 or 1 (dir index), -1 none
  int from_exact = 0; // predecessor sub-state
  int width = 0;      // 0 marks "not transited through a new pattern"
  double height = 0.0;
};

// dp[i][dirIdx][exact] where exact=1 restricts to states whose last
// pattern's right foot sits exactly at i. The split keeps the
// connect-to-pattern transition exact instead of relying on tie-break
// priorities alone; dp[i][dir] of the merged formulation is the max
// over the two sub-states.
struct DpTable {
  int n = 0;
  double step = 0.0;
  int gap_steps = 0;
  int protect_steps = 0;
  std::vector<std::array<std::array<double, 2>, 2>> dp;
  std::vector<std::array<std::array<TransitRecord, 2>, 2>> transit;

  double merged(int i, int dir_idx) const {
    return std::max(dp[i][dir_idx][0], dp[i][dir_idx][1]);
  }
};

struct DpResult {
  double gain = 0.0;      // applied gain after capping at need
  double raw_gain = 0.0;  // dp optimum before capping
  int dir_max = 1;        // +1 or -1
  std::vector<Pattern> patterns;
  DpTable table;
};

DpResult dp_extend_segment(const Environment& env, const DiscretizedSegment& ds,
                           double need, const ExtendRules& rules);

std::vector<Pattern> restore_patterns(const DpTable& table, int dir_max);

struct ApplyResult {
  std::vector<Point> polyline;        // replacement nodes for the chord
  std::vector<Segment> new_segments;  // sides, hats and residual pieces
  double added_length = 0.0;
};

ApplyResult apply_patterns(const DiscretizedSegment& ds,
                           const std::vector<Pattern>& patterns);

// Splices the pattern polyline into the trace in place of the segment
// starting at node seg_index.
Trace splice_polyline(const Trace& trace, int seg_index,
                      const std::vector<Point>& polyline);

struct MeanderStats {
  double final_length = 0.0;
  double residual = 0.0;
  int patterns_inserted = 0;
  int segments_processed = 0;
};

// Full per-trace extension loop: FIFO queue over extendable segments,
// DP per segment, pattern application and re-enqueue of the new pieces
// until the target is met within tolerance or capacity runs out.
// extra_protect widens the minimum-length rule (used by median traces
// whose offset corners shorten segments by the pair separation).
Trace meander_trace(const Trace& trace, double l_target, const Layout& layout,
                    const std::vector<Polygon>& areas, double tolerance,
                    double l_disc = 0.0, double extra_protect = 0.0,
                    MeanderStats* stats = nullptr, bool allow_node_feet = true);

}  // namespace lm
