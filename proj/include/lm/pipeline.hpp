#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lm/assign.hpp"
#include "lm/extend.hpp"
#include "lm/layout.hpp"
#include "lm/msdtw.hpp"

namespace lm {

struct InfeasibleAssignment : std::runtime_error {
  InfeasibleAssignment(std::string msg, Assignment cert)
      : std::runtime_error(std::move(msg)), certificate(std::move(cert)) {}
  Assignment certificate;
};

// Populates routable_areas; throws InfeasibleAssignment with the
// deficit certificate when the space cannot satisfy the demands.
Layout run_assign(const Layout& input, double slab_pitch = 0.0);

struct TuneOptions {
  double l_disc = 0.0;      // 0: per-DRA default d_protect/2
  double tolerance = -1.0;  // <0: per-group tolerance from the file
  int threads = 1;
};

struct GroupReport {
  int group_id = 0;
  double max_error = 0.0;
  double avg_error = 0.0;
};

struct TuneReport {
  std::vector<GroupReport> groups;
  double wall_seconds = 0.0;
  int patterns_inserted = 0;
};

// The full pipeline on an assigned layout: merge pairs to median traces
// via MSDTW, meander every group member to its target, restore pairs.
// Member work is independent (routable areas are interior-disjoint),
// so it runs on a worker pool; results merge in member order, keeping
// the output identical for any thread count.
Layout run_tune(const Layout& input, const TuneOptions& options,
                TuneReport* report = nullptr);

}  // namespace lm
