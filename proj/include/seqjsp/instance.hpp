#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqjsp {

/// Input data that breaks a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Text that cannot be parsed; carries a 1-based line/column.
class ParseError : public ValidationError {
 public:
  ParseError(int line, int column, const std::string& what);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct Operation {
  int machine = 0;
  int proc_time = 1;

  friend bool operator==(const Operation&, const Operation&) = default;
};

/// n x m job-shop instance. ops are stored row-major: job i, position j.
class Instance {
 public:
  /// Throws ValidationError if a job repeats a machine, a machine id is out
  /// of range, or a processing time is < 1.
  Instance(int n_jobs, int n_machines, std::vector<Operation> ops);

  int n_jobs() const noexcept { return n_jobs_; }
  int n_machines() const noexcept { return n_machines_; }
  int n_ops() const noexcept { return n_jobs_ * n_machines_; }

  const Operation& op(int job, int pos) const { return ops_[static_cast<std::size_t>(job * n_machines_ + pos)]; }
  const Operation& op(int row) const { return ops_[static_cast<std::size_t>(row)]; }
  std::span<const Operation> job(int i) const {
    return {ops_.data() + static_cast<std::size_t>(i * n_machines_), static_cast<std::size_t>(n_machines_)};
  }
  std::span<const Operation> ops() const noexcept { return ops_; }

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  int n_jobs_;
  int n_machines_;
  std::vector<Operation> ops_;
};

/// Row k = m*i + j holds [i, j, M_ij, p_ij].
struct SeqEncoding {
  using Row = std::array<int, 4>;

  int n_jobs = 0;
  int n_machines = 0;
  std::vector<Row> rows;

  friend bool operator==(const SeqEncoding&, const SeqEncoding&) = default;
};

/// Order in which the rows of a SeqEncoding are dispatched.
struct DispatchList {
  std::vector<int> perm;

  std::size_t size() const noexcept { return perm.size(); }
  friend bool operator==(const DispatchList&, const DispatchList&) = default;
};

inline int row_index(int job, int pos, int n_machines) { return n_machines * job + pos; }

/// Builds a list from (job, position) pairs.
DispatchList make_list(std::span<const std::pair<int, int>> job_pos, int n_machines);

SeqEncoding encode_instance(const Instance& inst);

/// Inverse of encode_instance. Throws ValidationError naming the first bad row.
Instance decode_instance(const SeqEncoding& seq);

/// Taillard-style random instance: p ~ U{1..99}, each job visits a uniformly
/// random machine permutation. Job i draws from its own sub-stream (seed, i).
Instance generate_taillard(int n_jobs, int n_machines, std::uint64_t seed);

/// Flow shop: same processing-time draws, every job visits machines 0..m-1.
Instance generate_flowshop(int n_jobs, int n_machines, std::uint64_t seed);

/// Instance text: "n m" then n lines of m "machine proc_time" pairs.
Instance read_instance(std::string_view text);
std::string write_instance(const Instance& inst);

/// Dataset text: instance count, then the instances back to back.
std::vector<Instance> read_dataset(std::string_view text);
std::string write_dataset(std::span<const Instance> instances);

Instance read_instance_file(const std::string& path);
std::vector<Instance> read_dataset_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace seqjsp
