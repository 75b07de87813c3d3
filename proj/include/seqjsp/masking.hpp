#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace seqjsp {

/// A caller broke an internal precondition (e.g. the decoder picked a masked row).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// JSP keeps each job's operation order; OSP (experimental) only forbids repeats.
enum class ProblemMode { JSP, OSP };

ProblemMode parse_problem_mode(std::string_view s);

/// Per-lane scheduled/masked flags over the n*m input rows.
///
/// JSP: row p is selectable iff !sched[p] && !mask[p]; at every step exactly the
/// next unscheduled operation of each unfinished job is selectable.
/// OSP: row p is selectable iff !sched[p].
class MaskState {
 public:
  MaskState(int batch, int n_jobs, int n_machines, ProblemMode mode);

  int batch() const noexcept { return batch_; }
  int rows() const noexcept { return rows_; }
  int n_jobs() const noexcept { return n_jobs_; }
  int n_machines() const noexcept { return n_machines_; }
  ProblemMode mode() const noexcept { return mode_; }

  bool scheduled(int lane, int row) const { return sched_[index(lane, row)] != 0; }
  bool masked(int lane, int row) const { return mask_[index(lane, row)] != 0; }
  bool selectable(int lane, int row) const {
    const auto k = index(lane, row);
    return sched_[k] == 0 && mask_[k] == 0;
  }
  int steps_taken(int lane) const { return steps_[static_cast<std::size_t>(lane)]; }
  std::vector<int> selectable_rows(int lane) const;

  /// Marks `row` scheduled in `lane` and unmasks the job's next operation.
  /// Throws ContractViolation if the row is not selectable.
  void step(int lane, int row);

 private:
  std::size_t index(int lane, int row) const {
    return static_cast<std::size_t>(lane) * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(row);
  }

  int batch_;
  int n_jobs_;
  int n_machines_;
  int rows_;
  ProblemMode mode_;
  std::vector<std::uint8_t> sched_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> steps_;
};

MaskState init_masks(int batch, int n_jobs, int n_machines, ProblemMode mode = ProblemMode::JSP);

MaskState step_update(MaskState state, int lane, int row);

/// Value substituted for masked scores: -inf where representable.
template <typename T>
constexpr T masked_score() {
  if constexpr (std::numeric_limits<T>::has_infinity) return -std::numeric_limits<T>::infinity();
  else return static_cast<T>(-1e30);
}

/// Replaces the scores of non-selectable rows of `lane` in place.
template <typename T>
void mask_scores(std::span<T> scores, const MaskState& state, int lane) {
  if (scores.size() != static_cast<std::size_t>(state.rows()))
    throw ContractViolation("score vector length does not match n*m");
  for (int p = 0; p < state.rows(); ++p)
    if (!state.selectable(lane, p)) scores[static_cast<std::size_t>(p)] = masked_score<T>();
}

/// Softmax that maps -inf to exactly 0. Throws ContractViolation if every entry is masked.
std::vector<double> masked_softmax(std::span<const double> scores);

/// Depth-first enumeration of every complete legal trajectory for one n x m lane.
/// Returns the number of trajectories; `visit` may be empty.
std::uint64_t enumerate_trajectories(int n_jobs, int n_machines, ProblemMode mode,
                                     const std::function<void(const std::vector<int>&)>& visit = {});

}  // namespace seqjsp
