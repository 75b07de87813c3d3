#include "seqjsp/masking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqjsp {

ProblemMode parse_problem_mode(std::string_view s) {
  if (s == "jsp" || s == "JSP") return ProblemMode::JSP;
  if (s == "osp" || s == "OSP") return ProblemMode::OSP;
  throw std::invalid_argument("unknown problem mode '" + std::string(s) + "'");
}

MaskState::MaskState(int batch, int n_jobs, int n_machines, ProblemMode mode)
    : batch_(batch), n_jobs_(n_jobs), n_machines_(n_machines), rows_(n_jobs * n_machines), mode_(mode) {
  if (batch < 1 || n_jobs < 1 || n_machines < 1) throw ContractViolation("mask state needs batch, n, m >= 1");
  const auto total = static_cast<std::size_t>(batch) * static_cast<std::size_t>(rows_);
  sched_.assign(total, 0);
  mask_.assign(total, 0);
  steps_.assign(static_cast<std::size_t>(batch), 0);
  if (mode_ == ProblemMode::JSP)
    for (int k = 0; k < batch_; ++k)
      for (int p = 0; p < rows_; ++p) mask_[index(k, p)] = (p % n_machines_ != 0) ? 1 : 0;
}

std::vector<int> MaskState::selectable_rows(int lane) const {
  std::vector<int> out;
  for (int p = 0; p < rows_; ++p)
    if (selectable(lane, p)) out.push_back(p);
  return out;
}

void MaskState::step(int lane, int row) {
  if (lane < 0 || lane >= batch_ || row < 0 || row >= rows_)
    throw ContractViolation("mask update out of range: lane " + std::to_string(lane) + ", row " + std::to_string(row));
  if (!selectable(lane, row))
    throw ContractViolation("row " + std::to_string(row) + " is not selectable in lane " + std::to_string(lane));
  sched_[index(lane, row)] = 1;
  // No unmasking across the job boundary.
  if (mode_ == ProblemMode::JSP && row % n_machines_ < n_machines_ - 1) mask_[index(lane, row + 1)] = 0;
  ++steps_[static_cast<std::size_t>(lane)];
}

MaskState init_masks(int batch, int n_jobs, int n_machines, ProblemMode mode) {
  return MaskState(batch, n_jobs, n_machines, mode);
}

MaskState step_update(MaskState state, int lane, int row) {
  state.step(lane, row);
  return state;
}

std::vector<double> masked_softmax(std::span<const double> scores) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) hi = std::max(hi, s);
  if (!std::isfinite(hi)) throw ContractViolation("all rows are masked");
  std::vector<double> out(scores.size());
  double total = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    out[p] = std::isinf(scores[p]) ? 0.0 : std::exp(scores[p] - hi);
    total += out[p];
  }
  for (auto& x : out) x /= total;
  return out;
}

namespace {

std::uint64_t enumerate_from(MaskState& state, std::vector<int>& prefix,
                             const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(prefix.size()) == state.rows()) {
    if (visit) visit(prefix);
    return 1;
  }
  std::uint64_t count = 0;
  for (int p : state.selectable_rows(0)) {
    auto next = state;
    next.step(0, p);
    prefix.push_back(p);
    count += enumerate_from(next, prefix, visit);
    prefix.pop_back();
  }
  return count;
}

}  // namespace

std::uint64_t enumerate_trajectories(int n_jobs, int n_machines, ProblemMode mode,
                                     const std::function<void(const std::vector<int>&)>& visit) {
  auto state = init_masks(1, n_jobs, n_machines, mode);
  std::vector<int> prefix;
  return enumerate_from(state, prefix, visit);
}

}  // namespace seqjsp
