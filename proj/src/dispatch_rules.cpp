#include "seqjsp/dispatch_rules.hpp"

#include <string>

namespace seqjsp {

std::string_view to_string(RuleKind rule) {
  switch (rule) {
    case RuleKind::SPT: return "SPT";
    case RuleKind::MWKR: return "MWKR";
    case RuleKind::MOPNR: return "MOPNR";
    case RuleKind::FDD: return "FDD";
  }
  return "?";
}

RuleKind parse_rule(std::string_view s) {
  for (auto r : kAllRules)
    if (s == to_string(r)) return r;
  throw ValidationError("unknown dispatching rule '" + std::string(s) + "'");
}

bool prefers_lower(RuleKind rule) { return rule == RuleKind::SPT || rule == RuleKind::FDD; }

namespace {

struct Key {
  // Key value as a fraction num/den (den > 0), so FDD compares exactly.
  long long num;
  long long den;
};

Key exact_key(const Instance& inst, int job, int next_pos, RuleKind rule) {
  const auto ops = inst.job(job);
  long long done = 0;  // work up to and including next_pos
  long long remaining = 0;
  for (int k = 0; k < inst.n_machines(); ++k) {
    if (k <= next_pos) done += ops[static_cast<std::size_t>(k)].proc_time;
    if (k >= next_pos) remaining += ops[static_cast<std::size_t>(k)].proc_time;
  }
  switch (rule) {
    case RuleKind::SPT: return {ops[static_cast<std::size_t>(next_pos)].proc_time, 1};
    case RuleKind::MWKR: return {remaining, 1};
    case RuleKind::MOPNR: return {inst.n_machines() - next_pos, 1};
    case RuleKind::FDD: return {done, remaining};
  }
  return {0, 1};
}

// Strictly better under the rule's direction.
bool better(const Key& a, const Key& b, RuleKind rule) {
  const auto lhs = a.num * b.den;
  const auto rhs = b.num * a.den;
  return prefers_lower(rule) ? lhs < rhs : lhs > rhs;
}

}  // namespace

double rule_key(const Instance& inst, int job, int next_pos, RuleKind rule) {
  if (next_pos < 0 || next_pos >= inst.n_machines()) throw ValidationError("job has no unscheduled operation");
  const auto k = exact_key(inst, job, next_pos, rule);
  return static_cast<double>(k.num) / static_cast<double>(k.den);
}

DispatchList run_pdr(const Instance& inst, RuleKind rule) {
  const int n = inst.n_jobs();
  const int m = inst.n_machines();
  std::vector<int> next(static_cast<std::size_t>(n), 0);
  DispatchList list;
  list.perm.reserve(static_cast<std::size_t>(inst.n_ops()));
  for (int step = 0; step < inst.n_ops(); ++step) {
    int best = -1;
    Key best_key{0, 1};
    for (int i = 0; i < n; ++i) {
      if (next[static_cast<std::size_t>(i)] >= m) continue;
      const auto key = exact_key(inst, i, next[static_cast<std::size_t>(i)], rule);
      if (best < 0 || better(key, best_key, rule)) {
        best = i;
        best_key = key;
      }
    }
    list.perm.push_back(row_index(best, next[static_cast<std::size_t>(best)]++, m));
  }
  return list;
}

}  // namespace seqjsp
