#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqjsp/instance.hpp"

namespace seqjsp {

/// How build_schedule chooses a start time.
///   GapInsert: earliest start, idle gaps between placed operations are usable.
///   Append:    never before the machine's current horizon.
enum class BuildMode { GapInsert, Append };

BuildMode parse_build_mode(std::string_view s);
std::string_view to_string(BuildMode mode);

struct ScheduledOp {
  int start = 0;
  int end = 0;
  int machine = 0;

  friend bool operator==(const ScheduledOp&, const ScheduledOp&) = default;
};

/// Start/end per (job, position), row-major like Instance.
class Schedule {
 public:
  Schedule(int n_jobs, int n_machines, std::vector<ScheduledOp> entries);

  int n_jobs() const noexcept { return n_jobs_; }
  int n_machines() const noexcept { return n_machines_; }
  const ScheduledOp& at(int job, int pos) const { return entries_[static_cast<std::size_t>(job * n_machines_ + pos)]; }
  const std::vector<ScheduledOp>& entries() const noexcept { return entries_; }
  int makespan() const noexcept { return makespan_; }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  int n_jobs_;
  int n_machines_;
  std::vector<ScheduledOp> entries_;
  int makespan_;
};

/// Job `job` has position `ahead_pos` at list index `ahead_index`, before
/// position `behind_pos` at list index `behind_index`.
struct PrecedenceViolation {
  int job;
  int ahead_pos;
  int behind_pos;
  int ahead_index;
  int behind_index;

  std::string describe() const;
};

struct FeasibilityReport {
  bool feasible = true;
  std::optional<PrecedenceViolation> violation;

  explicit operator bool() const noexcept { return feasible; }
};

/// Throws ValidationError if `list` is not a permutation of {0..n*m-1}.
FeasibilityReport check_feasible(const DispatchList& list, const Instance& inst);

/// Incremental list scheduler. Copyable, so search code can branch on it.
class ScheduleBuilder {
 public:
  ScheduleBuilder(const Instance& inst, BuildMode mode);

  /// Places the next operation of `job`. Returns the placed interval.
  const ScheduledOp& place_next(int job);
  int next_position(int job) const { return next_pos_[static_cast<std::size_t>(job)]; }
  int job_ready(int job) const { return job_ready_[static_cast<std::size_t>(job)]; }
  int current_makespan() const noexcept { return makespan_; }
  int placed() const noexcept { return placed_; }
  const Instance& instance() const noexcept { return *inst_; }

  Schedule finish() const;

 private:
  struct Interval {
    int start;
    int end;
  };

  const Instance* inst_;
  BuildMode mode_;
  std::vector<std::vector<Interval>> machine_busy_;  // sorted by start
  std::vector<int> next_pos_;
  std::vector<int> job_ready_;
  std::vector<ScheduledOp> entries_;
  int makespan_ = 0;
  int placed_ = 0;
};

/// Maps a feasible dispatch list to a schedule. Throws ValidationError with the
/// first violation if the list is infeasible.
Schedule build_schedule(const Instance& inst, const DispatchList& list, BuildMode mode = BuildMode::GapInsert);

int makespan(const Schedule& s);

/// max(longest job, most loaded machine).
int makespan_lower_bound(const Instance& inst);

/// Empty if `s` satisfies precedence, machine exclusivity and durations of `inst`.
std::string validate_schedule(const Schedule& s, const Instance& inst);

/// CSV rows: job,pos,machine,start,end
std::string schedule_csv(const Schedule& s);

}  // namespace seqjsp
