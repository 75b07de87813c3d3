#pragma once

#include <array>
#include <string_view>

#include "seqjsp/instance.hpp"

namespace seqjsp {

enum class RuleKind { SPT, MWKR, MOPNR, FDD };

inline constexpr std::array<RuleKind, 4> kAllRules{RuleKind::SPT, RuleKind::MWKR, RuleKind::MOPNR, RuleKind::FDD};

std::string_view to_string(RuleKind rule);
RuleKind parse_rule(std::string_view s);

/// True if the rule dispatches the candidate with the smallest key (SPT, FDD);
/// false if it prefers the largest (MWKR, MOPNR).
bool prefers_lower(RuleKind rule);

/// Priority key of job `job` whose next unscheduled operation is `next_pos`:
///   SPT   p[job][next_pos]
///   MWKR  sum of remaining processing time
///   MOPNR number of remaining operations
///   FDD   (sum_{k<=next_pos} p) / (sum_{k>=next_pos} p)
double rule_key(const Instance& inst, int job, int next_pos, RuleKind rule);

/// List-based greedy: each step picks among the jobs' next operations by the
/// rule key, ties to the lowest job index.
DispatchList run_pdr(const Instance& inst, RuleKind rule);

}  // namespace seqjsp
