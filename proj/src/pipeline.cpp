#include "lm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <sstream>
#include <thread>

namespace lm {

Layout run_assign(const Layout& input, double slab_pitch) {
  Layout out = input;
  double pitch = slab_pitch;
  if (pitch <= 0.0) {
    Point lo = Point::Constant(std::numeric_limits<double>::infinity());
    Point hi = -lo;
    for (const Dra& d : input.dras) {
      const auto bb = d.region.bounding_box();
      lo = lo.cwiseMin(bb.first);
      hi = hi.cwiseMax(bb.second);
    }
    pitch = std::max((hi - lo).maxCoeff() / 8.0, 1.0);
  }
  auto [regions, demands] = build_regions(input, pitch);
  const Assignment assignment = solve_assignment(regions, demands);
  if (!assignment.feasible) {
    std::ostringstream os;
    os << "assignment infeasible: deficit "
       << assignment.total_required - assignment.total_assigned << " over members";
    for (int id : assignment.deficient_members) os << " " << id;
    throw InfeasibleAssignment(os.str(), assignment);
  }
  out.routable_areas = carve_routable_areas(input, regions, assignment);
  return out;
}

namespace {

struct WorkItem {
  int group_index = 0;
  int member_id = 0;
  bool is_pair = false;
  double target = 0.0;
  double tolerance = 0.0;
};

std::vector<double> pair_rule_set(const Layout& layout,
                                  const DifferentialPair& pair) {
  const Trace* tp = layout.find_trace(pair.trace_p);
  const Trace* tn = layout.find_trace(pair.trace_n);
  std::set<double> rules{pair.gap};
  for (const Trace* t : {tp, tn})
    for (const Point& p : t->nodes) {
      const double dg = layout.dra_at(p).rules.d_gap;
      if (dg > pair.gap) rules.insert(dg);
    }
  return {rules.begin(), rules.end()};
}

}  // namespace

Layout run_tune(const Layout& input, const TuneOptions& options,
                TuneReport* report) {
  const auto t_start = std::chrono::steady_clock::now();
  Layout out = input;
  // Violations already present in the tuner's input are the baseline
  // the result is not accountable for; they travel with the file.
  for (const Violation& v : drc_check(input)) out.legacy.insert(v.fingerprint());

  std::vector<WorkItem> work;
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    const MatchGroup& grp = out.groups[g];
    const double tol = options.tolerance >= 0.0 ? options.tolerance : grp.tolerance;
    for (int id : grp.members) {
      WorkItem item;
      item.group_index = int(g);
      item.member_id = id;
      item.is_pair = out.find_pair(id) != nullptr;
      item.target = grp.target_length;
      item.tolerance = tol;
      work.push_back(item);
    }
  }

  // Merge differential pairs into median traces first (cheap, serial).
  std::map<int, MedianTrace> medians;
  std::map<int, double> median_targets;
  for (WorkItem& item : work) {
    if (!item.is_pair) continue;
    const DifferentialPair& pair = *out.find_pair(item.member_id);
    const Trace* tp = out.find_trace(pair.trace_p);
    const Trace* tn = out.find_trace(pair.trace_n);
    const std::vector<Point> mp(tp->nodes.begin() + pair.breakout_p, tp->nodes.end());
    const std::vector<Point> mn(tn->nodes.begin() + pair.breakout_n, tn->nodes.end());
    const MatchSet match = msdtw(mp, mn, pair_rule_set(out, pair));
    MedianTrace med = merge_to_median(out, pair, match);
    // The restored mean length exceeds the median length by a constant
    // (breakouts, junctions, skew compensation); patterns do not change
    // it because their corner effects cancel in the mean. Calibrate the
    // median's own target from the untuned round trip.
    const RestoredPair base = restore_pair(med, med.trace);
    const double offset = 0.5 * (polyline_length(base.nodes_p) +
                                 polyline_length(base.nodes_n)) -
                          trace_length(med.trace);
    median_targets[pair.id] = item.target - offset;
    medians.emplace(pair.id, std::move(med));
  }

  // Meander every member. Routable areas are interior-disjoint, so the
  // members are independent; results are committed in work order to
  // keep the output byte-identical for any thread count.
  std::vector<Trace> results(work.size());
  std::vector<MeanderStats> stats(work.size());
  std::vector<std::string> errors(work.size());
  std::atomic<std::size_t> cursor{0};
  const int threads = std::max(1, options.threads);

  const auto worker = [&]() {
    for (std::size_t k = cursor.fetch_add(1); k < work.size();
         k = cursor.fetch_add(1)) {
      const WorkItem& item = work[k];
      try {
        const auto areas_it = out.routable_areas.find(item.member_id);
        if (areas_it == out.routable_areas.end())
          throw std::runtime_error("no routable area for member " +
                                   std::to_string(item.member_id));
        if (item.is_pair) {
          const MedianTrace& med = medians.at(item.member_id);
          results[k] = meander_trace(med.trace, median_targets.at(item.member_id),
                                     out, areas_it->second, item.tolerance,
                                     options.l_disc, med.extra_protect, &stats[k],
                                     /*allow_node_feet=*/false);
        } else {
          const Trace& t = *out.find_trace(item.member_id);
          results[k] = meander_trace(t, item.target, out, areas_it->second,
                                     item.tolerance, options.l_disc, 0.0,
                                     &stats[k]);
        }
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  if (threads == 1 || work.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min<std::size_t>(threads, work.size());
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t k = 0; k < work.size(); ++k)
    if (!errors[k].empty())
      throw std::runtime_error("member " + std::to_string(work[k].member_id) +
                               ": " + errors[k]);

  // Commit results and restore the pairs.
  for (std::size_t k = 0; k < work.size(); ++k) {
    const WorkItem& item = work[k];
    if (item.is_pair) {
      const MedianTrace& med = medians.at(item.member_id);
      const RestoredPair restored = restore_pair(med, results[k]);
      const DifferentialPair& pair = *out.find_pair(item.member_id);
      out.find_trace(pair.trace_p)->nodes = restored.nodes_p;
      out.find_trace(pair.trace_n)->nodes = restored.nodes_n;
    } else {
      out.find_trace(item.member_id)->nodes = results[k].nodes;
    }
  }

  if (report) {
    report->groups.clear();
    report->patterns_inserted = 0;
    for (const MeanderStats& s : stats) report->patterns_inserted += s.patterns_inserted;
    for (std::size_t g = 0; g < out.groups.size(); ++g) {
      const auto [mx, avg] = group_metrics(out.groups[g], out);
      report->groups.push_back({out.groups[g].id, mx, avg});
    }
    report->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
  }
  return out;
}

}  // namespace lm
