#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lm/geom.hpp"

namespace lm {

// Design-rule distances of one DRA. d_gap and d_obs are edge-to-edge
// rules; center_* convert them to centerline clearances for the URA
// machinery.
struct RuleSet {
  double d_gap = 0.0;
  double d_obs = 0.0;
  double d_protect = 0.0;
  double trace_width = 0.0;

  double center_gap() const { return d_gap + trace_width; }
  double center_obs() const { return d_obs + 0.5 * trace_width; }
};

struct Dra {
  int id = 0;
  Polygon region;
  RuleSet rules;
};

enum class TraceKind { SingleEnded, MedianOfPair };

struct Trace {
  int id = 0;
  std::vector<Point> nodes;
  double width = 0.0;
  TraceKind kind = TraceKind::SingleEnded;
};

struct DifferentialPair {
  int id = 0;
  int trace_p = 0;
  int trace_n = 0;
  double gap = 0.0;  // edge-to-edge rule between the sub-traces
  int breakout_p = 0;
  int breakout_n = 0;
};

struct MatchGroup {
  int id = 0;
  std::vector<int> members;  // trace and/or pair ids
  double target_length = 0.0;
  double tolerance = 0.0;
};

struct Layout {
  std::vector<Dra> dras;
  std::vector<Polygon> obstacles;
  std::vector<Trace> traces;
  std::vector<DifferentialPair> pairs;
  std::vector<MatchGroup> groups;
  std::map<int, std::vector<Polygon>> routable_areas;  // trace or pair id

  // Violations present in the input file; recorded at load, never
  // serialized. The tuner is only accountable for violations outside
  // this set.
  std::set<std::string> legacy;

  const Trace* find_trace(int id) const;
  Trace* find_trace(int id);
  const DifferentialPair* find_pair(int id) const;
  const Dra& dra_at(const Point& p) const;
};

double polyline_length(const std::vector<Point>& nodes);
double trace_length(const Trace& trace);

struct Violation {
  enum class Rule { Gap, Obstacle, ShortSegment, OutsideArea };
  Rule rule = Rule::Gap;
  std::string entity_a;
  std::string entity_b;
  double measured = 0.0;
  double limit = 0.0;
  Point where = Point::Zero();

  std::string describe() const;
  std::string fingerprint() const;
};

std::vector<Violation> drc_check(const Layout& layout);

// Violations whose fingerprints are not in layout.legacy.
std::vector<Violation> new_violations(const Layout& layout);

std::set<std::string> violation_fingerprints(const std::vector<Violation>& v);

// Length of a group member: the trace length, or the mean of the two
// sub-trace lengths for a differential pair.
double member_length(const Layout& layout, int member_id);

// (max_error, avg_error) per the matching-error metrics. Throws if a
// member exceeds the target (overshoot is a tuner bug).
std::pair<double, double> group_metrics(const MatchGroup& group,
                                        const Layout& layout);

double extension_ratio(double l_extended, double l_original);

void validate_layout(const Layout& layout);

Layout load_layout(const std::string& path);
void save_layout(const Layout& layout, const std::string& path);
std::string layout_to_json(const Layout& layout);
Layout layout_from_json(const std::string& text);

}  // namespace lm
