#include "seqjsp/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "seqjsp/instance.hpp"

namespace seqjsp {

double EvalReport::mean(const MethodRow& row) const {
  if (row.makespans.empty()) return 0;
  double s = 0;
  for (int v : row.makespans) s += v;
  return s / static_cast<double>(row.makespans.size());
}

double EvalReport::reference_mean() const {
  if (reference.empty()) return 0;
  double s = 0;
  for (int v : reference) s += v;
  return s / static_cast<double>(reference.size());
}

double EvalReport::gap(const MethodRow& row) const {
  const double ref = reference_mean();
  if (!(ref > 0)) throw ValidationError("gap reference must be positive");
  return mean(row) / ref - 1.0;
}

std::string EvalReport::reference_label() const {
  const auto n = std::count(certified.begin(), certified.end(), true);
  if (n == static_cast<long>(certified.size())) return "oracle";
  if (n == 0) return "best-found";
  return "mixed";
}

EvalReport make_report(std::vector<MethodRow> methods, const std::vector<std::optional<int>>& certified_optimum) {
  EvalReport r;
  const auto n = certified_optimum.size();
  for (const auto& m : methods)
    if (m.makespans.size() != n)
      throw ValidationError("method '" + m.method + "' has " + std::to_string(m.makespans.size()) +
                            " results for " + std::to_string(n) + " instances");
  r.reference.resize(n);
  r.certified.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (certified_optimum[k]) {
      r.reference[k] = *certified_optimum[k];
      r.certified[k] = true;
      continue;
    }
    int best = std::numeric_limits<int>::max();
    for (const auto& m : methods) best = std::min(best, m.makespans[k]);
    if (methods.empty()) throw ValidationError("no method results and no certified optimum");
    r.reference[k] = best;
    r.certified[k] = false;
  }
  r.methods = std::move(methods);
  return r;
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream o;
  o << "# seed=" << r.seed << " config_hash=" << r.config_hash << " checkpoint_hash=" << r.checkpoint_hash
    << " reference=" << r.reference_label() << "\n";
  o << "instance,method,makespan,reference,reference_kind\n";
  for (const auto& m : r.methods)
    for (std::size_t k = 0; k < r.instances(); ++k)
      o << k << ',' << m.method << ',' << m.makespans[k] << ',' << r.reference[k] << ','
        << (r.certified[k] ? "oracle" : "best-found") << '\n';
  return o.str();
}

std::string report_table(const EvalReport& r) {
  std::size_t width = 9;
  for (const auto& m : r.methods) width = std::max(width, m.method.size());
  const std::string ref_name = "reference (" + r.reference_label() + ")";
  width = std::max(width, ref_name.size());
  std::ostringstream o;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s %12s %9s\n", static_cast<int>(width), "method", "mean Cmax", "gap");
  o << buf;
  for (const auto& m : r.methods) {
    std::snprintf(buf, sizeof buf, "%-*s %12.2f %8.2f%%\n", static_cast<int>(width), m.method.c_str(), r.mean(m),
                  100.0 * r.gap(m));
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %12.2f %9s\n", static_cast<int>(width), ref_name.c_str(), r.reference_mean(),
                "-");
  o << buf;
  o << r.instances() << " instances, seed " << r.seed;
  if (!r.config_hash.empty()) o << ", config " << r.config_hash;
  if (!r.checkpoint_hash.empty()) o << ", checkpoint " << r.checkpoint_hash;
  o << "\n";
  return o.str();
}

}  // namespace seqjsp
