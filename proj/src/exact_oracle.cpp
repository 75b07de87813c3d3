#include "seqjsp/exact_oracle.hpp"

#include <algorithm>
#include <limits>

#include "seqjsp/dispatch_rules.hpp"
#include "seqjsp/masking.hpp"

namespace seqjsp {

namespace {

class Search {
 public:
  Search(const Instance& inst, const OracleOptions& options) : inst_(inst), options_(options) {}

  OracleResult run() {
    best_ = std::numeric_limits<int>::max();
    if (options_.prune) {
      for (auto rule : kAllRules) {
        auto list = run_pdr(inst_, rule);
        const int cmax = build_schedule(inst_, list, options_.mode).makespan();
        if (cmax < best_) {
          best_ = cmax;
          best_list_ = std::move(list);
        }
      }
    }
    ScheduleBuilder builder(inst_, options_.mode);
    auto masks = init_masks(1, inst_.n_jobs(), inst_.n_machines(), ProblemMode::JSP);
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(inst_.n_ops()));
    const bool complete = descend(builder, masks, prefix);
    if (best_list_.perm.empty()) {
      best_list_ = run_pdr(inst_, RuleKind::MWKR);
      best_ = build_schedule(inst_, best_list_, options_.mode).makespan();
    }
    return {best_, best_list_, explored_, leaves_, complete};
  }

 private:
  int lower_bound(const ScheduleBuilder& b) const {
    const int m = inst_.n_machines();
    int bound = b.current_makespan();
    std::vector<int> load(static_cast<std::size_t>(m), 0);
    std::vector<int> release(static_cast<std::size_t>(m), std::numeric_limits<int>::max());
    for (int i = 0; i < inst_.n_jobs(); ++i) {
      int t = b.job_ready(i);
      for (int j = b.next_position(i); j < m; ++j) {
        const auto& op = inst_.op(i, j);
        auto mach = static_cast<std::size_t>(op.machine);
        release[mach] = std::min(release[mach], t);
        load[mach] += op.proc_time;
        t += op.proc_time;
      }
      bound = std::max(bound, t);
    }
    for (int k = 0; k < m; ++k)
      if (load[static_cast<std::size_t>(k)] > 0)
        bound = std::max(bound, release[static_cast<std::size_t>(k)] + load[static_cast<std::size_t>(k)]);
    return bound;
  }

  // Returns false once the node budget is exhausted.
  bool descend(const ScheduleBuilder& builder, const MaskState& masks, std::vector<int>& prefix) {
    if (builder.placed() == inst_.n_ops()) {
      ++leaves_;
      if (builder.current_makespan() < best_) {
        best_ = builder.current_makespan();
        best_list_.perm = prefix;
      }
      return true;
    }
    for (int row : masks.selectable_rows(0)) {
      if (explored_ >= options_.node_budget) return false;
      ++explored_;
      auto child = builder;
      child.place_next(row / inst_.n_machines());
      if (options_.prune && lower_bound(child) >= best_) continue;
      auto child_masks = masks;
      child_masks.step(0, row);
      prefix.push_back(row);
      const bool ok = descend(child, child_masks, prefix);
      prefix.pop_back();
      if (!ok) return false;
    }
    return true;
  }

  const Instance& inst_;
  OracleOptions options_;
  int best_ = 0;
  DispatchList best_list_;
  std::uint64_t explored_ = 0;
  std::uint64_t leaves_ = 0;
};

}  // namespace

OracleResult optimal_makespan(const Instance& inst, const OracleOptions& options) {
  if (options.node_budget == 0) throw ValidationError("oracle node budget must be positive");
  return Search(inst, options).run();
}

OracleResult optimal_makespan(const Instance& inst, std::uint64_t node_budget) {
  OracleOptions options;
  options.node_budget = node_budget;
  return optimal_makespan(inst, options);
}

double gap(double value, double optimum) {
  if (!(optimum > 0)) throw ValidationError("gap reference must be positive");
  return value / optimum - 1.0;
}

}  // namespace seqjsp
