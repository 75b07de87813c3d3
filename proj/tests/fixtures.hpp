#pragma once

#include <utility>
#include <vector>

#include "seqjsp/instance.hpp"

namespace fixtures {

// 3x4 instance used for replay checks.
inline seqjsp::Instance worked_3x4() {
  return seqjsp::Instance(3, 4,
                          {{0, 4}, {2, 2}, {1, 6}, {3, 2},  //
                           {0, 4}, {3, 5}, {2, 7}, {1, 8},  //
                           {2, 6}, {0, 4}, {1, 3}, {3, 1}});
}

// A feasible list for it, as (job, position); makespan 27 in both builder modes.
inline seqjsp::DispatchList worked_3x4_list() {
  const std::vector<std::pair<int, int>> jp = {{1, 0}, {0, 0}, {2, 0}, {1, 1}, {0, 1}, {2, 1},
                                               {0, 2}, {2, 2}, {1, 2}, {2, 3}, {0, 3}, {1, 3}};
  return seqjsp::make_list(jp, 4);
}

// 2x3 instance used for the masking walk-through.
inline seqjsp::Instance small_2x3() {
  return seqjsp::Instance(2, 3, {{1, 4}, {2, 7}, {0, 5}, {0, 7}, {1, 3}, {2, 7}});
}

}  // namespace fixtures
