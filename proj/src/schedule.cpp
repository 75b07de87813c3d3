#include "seqjsp/schedule.hpp"

#include <algorithm>
#include <numeric>

namespace seqjsp {

BuildMode parse_build_mode(std::string_view s) {
  if (s == "gap-insert") return BuildMode::GapInsert;
  if (s == "append") return BuildMode::Append;
  throw ValidationError("unknown build mode '" + std::string(s) + "' (expected gap-insert or append)");
}

std::string_view to_string(BuildMode mode) { return mode == BuildMode::GapInsert ? "gap-insert" : "append"; }

Schedule::Schedule(int n_jobs, int n_machines, std::vector<ScheduledOp> entries)
    : n_jobs_(n_jobs), n_machines_(n_machines), entries_(std::move(entries)), makespan_(0) {
  if (entries_.size() != static_cast<std::size_t>(n_jobs * n_machines))
    throw ValidationError("schedule size does not match n*m");
  for (int i = 0; i < n_jobs_; ++i) makespan_ = std::max(makespan_, at(i, n_machines_ - 1).end);
}

std::string PrecedenceViolation::describe() const {
  return "job " + std::to_string(job) + ": position " + std::to_string(ahead_pos) + " (list index " +
         std::to_string(ahead_index) + ") is dispatched before position " + std::to_string(behind_pos) +
         " (list index " + std::to_string(behind_index) + ")";
}

FeasibilityReport check_feasible(const DispatchList& list, const Instance& inst) {
  const int rows = inst.n_ops();
  const int m = inst.n_machines();
  if (list.perm.size() != static_cast<std::size_t>(rows))
    throw ValidationError("dispatch list has " + std::to_string(list.perm.size()) + " entries, expected " +
                          std::to_string(rows));
  std::vector<int> where(static_cast<std::size_t>(rows), -1);
  for (int s = 0; s < rows; ++s) {
    const int r = list.perm[static_cast<std::size_t>(s)];
    if (r < 0 || r >= rows) throw ValidationError("dispatch list entry " + std::to_string(r) + " out of range");
    if (where[static_cast<std::size_t>(r)] >= 0)
      throw ValidationError("dispatch list repeats row " + std::to_string(r));
    where[static_cast<std::size_t>(r)] = s;
  }
  std::vector<int> next(static_cast<std::size_t>(inst.n_jobs()), 0);
  for (int s = 0; s < rows; ++s) {
    const int r = list.perm[static_cast<std::size_t>(s)];
    const int job = r / m;
    const int pos = r % m;
    auto& expected = next[static_cast<std::size_t>(job)];
    if (pos != expected) {
      // pos > expected: the earlier operation of this job is still to come.
      return {false, PrecedenceViolation{job, pos, expected, s, where[static_cast<std::size_t>(row_index(job, expected, m))]}};
    }
    ++expected;
  }
  return {true, std::nullopt};
}

ScheduleBuilder::ScheduleBuilder(const Instance& inst, BuildMode mode)
    : inst_(&inst),
      mode_(mode),
      machine_busy_(static_cast<std::size_t>(inst.n_machines())),
      next_pos_(static_cast<std::size_t>(inst.n_jobs()), 0),
      job_ready_(static_cast<std::size_t>(inst.n_jobs()), 0),
      entries_(static_cast<std::size_t>(inst.n_ops())) {}

const ScheduledOp& ScheduleBuilder::place_next(int job) {
  auto& pos = next_pos_[static_cast<std::size_t>(job)];
  if (pos >= inst_->n_machines()) throw ValidationError("job " + std::to_string(job) + " has no operation left");
  const auto& op = inst_->op(job, pos);
  auto& busy = machine_busy_[static_cast<std::size_t>(op.machine)];
  int t = job_ready_[static_cast<std::size_t>(job)];
  std::size_t insert_at = busy.size();
  if (mode_ == BuildMode::Append) {
    if (!busy.empty()) t = std::max(t, busy.back().end);
  } else {
    for (std::size_t k = 0; k < busy.size(); ++k) {
      if (t + op.proc_time <= busy[k].start) {
        insert_at = k;
        break;
      }
      t = std::max(t, busy[k].end);
    }
  }
  const Interval iv{t, t + op.proc_time};
  busy.insert(busy.begin() + static_cast<std::ptrdiff_t>(insert_at), iv);
  job_ready_[static_cast<std::size_t>(job)] = iv.end;
  makespan_ = std::max(makespan_, iv.end);
  ++placed_;
  auto& entry = entries_[static_cast<std::size_t>(row_index(job, pos, inst_->n_machines()))];
  entry = {iv.start, iv.end, op.machine};
  ++pos;
  return entry;
}

Schedule ScheduleBuilder::finish() const {
  if (placed_ != inst_->n_ops()) throw ValidationError("schedule is incomplete");
  return Schedule(inst_->n_jobs(), inst_->n_machines(), entries_);
}

Schedule build_schedule(const Instance& inst, const DispatchList& list, BuildMode mode) {
  auto report = check_feasible(list, inst);
  if (!report) throw ValidationError("infeasible dispatch list: " + report.violation->describe());
  ScheduleBuilder builder(inst, mode);
  for (int r : list.perm) builder.place_next(r / inst.n_machines());
  return builder.finish();
}

int makespan(const Schedule& s) { return s.makespan(); }

int makespan_lower_bound(const Instance& inst) {
  int bound = 0;
  std::vector<int> load(static_cast<std::size_t>(inst.n_machines()), 0);
  for (int i = 0; i < inst.n_jobs(); ++i) {
    int len = 0;
    for (const auto& op : inst.job(i)) {
      len += op.proc_time;
      load[static_cast<std::size_t>(op.machine)] += op.proc_time;
    }
    bound = std::max(bound, len);
  }
  return std::max(bound, *std::max_element(load.begin(), load.end()));
}

std::string validate_schedule(const Schedule& s, const Instance& inst) {
  if (s.n_jobs() != inst.n_jobs() || s.n_machines() != inst.n_machines()) return "shape mismatch";
  std::vector<std::vector<ScheduledOp>> per_machine(static_cast<std::size_t>(inst.n_machines()));
  int cmax = 0;
  for (int i = 0; i < inst.n_jobs(); ++i) {
    for (int j = 0; j < inst.n_machines(); ++j) {
      const auto& e = s.at(i, j);
      const auto& op = inst.op(i, j);
      const auto where = "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (e.start < 0) return "negative start at " + where;
      if (e.end != e.start + op.proc_time) return "wrong duration at " + where;
      if (e.machine != op.machine) return "wrong machine at " + where;
      if (j > 0 && s.at(i, j - 1).end > e.start) return "job precedence violated at " + where;
      per_machine[static_cast<std::size_t>(e.machine)].push_back(e);
    }
    cmax = std::max(cmax, s.at(i, inst.n_machines() - 1).end);
  }
  for (auto& ops : per_machine) {
    std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t k = 1; k < ops.size(); ++k)
      if (ops[k - 1].end > ops[k].start) return "machine " + std::to_string(ops[k].machine) + " overlaps";
  }
  if (cmax != s.makespan()) return "makespan mismatch";
  return {};
}

std::string schedule_csv(const Schedule& s) {
  std::string out = "job,pos,machine,start,end\n";
  for (int i = 0; i < s.n_jobs(); ++i)
    for (int j = 0; j < s.n_machines(); ++j) {
      const auto& e = s.at(i, j);
      out += std::to_string(i) + ',' + std::to_string(j) + ',' + std::to_string(e.machine) + ',' +
             std::to_string(e.start) + ',' + std::to_string(e.end) + '\n';
    }
  return out;
}

}  // namespace seqjsp
