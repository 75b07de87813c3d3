#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqjsp {

struct MethodRow {
  std::string method;
  std::vector<int> makespans;  // one per instance
};

/// Per-instance makespans of several methods plus a gap reference per instance:
/// the certified optimum when known, otherwise the best value any method found.
struct EvalReport {
  std::vector<MethodRow> methods;
  std::vector<int> reference;
  std::vector<bool> certified;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string checkpoint_hash;

  std::size_t instances() const { return reference.size(); }
  double mean(const MethodRow& row) const;
  double reference_mean() const;
  /// mean(row) / reference_mean() - 1.
  double gap(const MethodRow& row) const;
  /// "oracle" if every reference is certified, "best-found" if none, else "mixed".
  std::string reference_label() const;
};

/// `certified_optimum[k]` holds the proven optimum of instance k, if any.
EvalReport make_report(std::vector<MethodRow> methods, const std::vector<std::optional<int>>& certified_optimum);

/// Long format: instance,method,makespan,reference,reference_kind. Metadata in
/// leading '#' lines.
std::string report_csv(const EvalReport& report);

/// Method x {mean makespan, gap} table.
std::string report_table(const EvalReport& report);

}  // namespace seqjsp
