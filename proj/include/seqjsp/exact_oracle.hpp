#pragma once

#include <cstdint>

#include "seqjsp/instance.hpp"
#include "seqjsp/schedule.hpp"

namespace seqjsp {

struct OracleResult {
  int optimal_makespan = 0;
  DispatchList optimal_list;
  std::uint64_t explored = 0;  // placements performed
  std::uint64_t leaves = 0;    // complete lists reached
  bool certified = false;      // false: budget ran out, value is the best incumbent
};

struct OracleOptions {
  std::uint64_t node_budget = 50'000'000;
  BuildMode mode = BuildMode::GapInsert;
  /// Bound pruning plus a dispatching-rule incumbent. Off = plain enumeration.
  bool prune = true;
};

/// Depth-first search over legal dispatch lists. Meant for n*m <= 16.
OracleResult optimal_makespan(const Instance& inst, const OracleOptions& options = {});
OracleResult optimal_makespan(const Instance& inst, std::uint64_t node_budget);

/// value / optimum - 1. Throws ValidationError if optimum <= 0.
double gap(double value, double optimum);

}  // namespace seqjsp
