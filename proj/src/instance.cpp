#include "seqjsp/instance.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "seqjsp/rng.hpp"

namespace seqjsp {

ParseError::ParseError(int line, int column, const std::string& what)
    : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string describe_op(int job, int pos) {
  return "job " + std::to_string(job) + " position " + std::to_string(pos);
}

// Returns an empty string when the operations form a valid instance.
std::string check_ops(int n_jobs, int n_machines, std::span<const Operation> ops, int* bad_index) {
  std::vector<char> seen(static_cast<std::size_t>(n_machines));
  for (int i = 0; i < n_jobs; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int j = 0; j < n_machines; ++j) {
      const auto k = i * n_machines + j;
      const auto& op = ops[static_cast<std::size_t>(k)];
      *bad_index = k;
      if (op.machine < 0 || op.machine >= n_machines)
        return describe_op(i, j) + ": machine " + std::to_string(op.machine) + " out of range [0, " +
               std::to_string(n_machines) + ")";
      if (op.proc_time < 1)
        return describe_op(i, j) + ": processing time " + std::to_string(op.proc_time) + " < 1";
      if (seen[static_cast<std::size_t>(op.machine)])
        return describe_op(i, j) + ": machine " + std::to_string(op.machine) + " visited twice";
      seen[static_cast<std::size_t>(op.machine)] = 1;
    }
  }
  return {};
}

}  // namespace

Instance::Instance(int n_jobs, int n_machines, std::vector<Operation> ops)
    : n_jobs_(n_jobs), n_machines_(n_machines), ops_(std::move(ops)) {
  if (n_jobs < 1 || n_machines < 1) throw ValidationError("instance needs n >= 1 and m >= 1");
  if (ops_.size() != static_cast<std::size_t>(n_jobs) * static_cast<std::size_t>(n_machines))
    throw ValidationError("instance has " + std::to_string(ops_.size()) + " operations, expected n*m = " +
                          std::to_string(n_jobs * n_machines));
  int bad = 0;
  if (auto msg = check_ops(n_jobs, n_machines, ops_, &bad); !msg.empty()) throw ValidationError(msg);
}

DispatchList make_list(std::span<const std::pair<int, int>> job_pos, int n_machines) {
  DispatchList list;
  list.perm.reserve(job_pos.size());
  for (auto [job, pos] : job_pos) list.perm.push_back(row_index(job, pos, n_machines));
  return list;
}

SeqEncoding encode_instance(const Instance& inst) {
  SeqEncoding seq{inst.n_jobs(), inst.n_machines(), {}};
  seq.rows.reserve(static_cast<std::size_t>(inst.n_ops()));
  for (int i = 0; i < inst.n_jobs(); ++i)
    for (int j = 0; j < inst.n_machines(); ++j) seq.rows.push_back({i, j, inst.op(i, j).machine, inst.op(i, j).proc_time});
  return seq;
}

Instance decode_instance(const SeqEncoding& seq) {
  const int n = seq.n_jobs;
  const int m = seq.n_machines;
  if (n < 1 || m < 1) throw ValidationError("sequence encoding needs n >= 1 and m >= 1");
  if (seq.rows.size() != static_cast<std::size_t>(n * m))
    throw ValidationError("sequence encoding has " + std::to_string(seq.rows.size()) + " rows, expected " +
                          std::to_string(n * m));
  std::vector<Operation> ops;
  ops.reserve(seq.rows.size());
  for (int k = 0; k < n * m; ++k) {
    const auto& r = seq.rows[static_cast<std::size_t>(k)];
    const auto prefix = "row " + std::to_string(k) + ": ";
    if (r[0] != k / m || r[1] != k % m)
      throw ValidationError(prefix + "expected (i, j) = (" + std::to_string(k / m) + ", " + std::to_string(k % m) +
                            "), found (" + std::to_string(r[0]) + ", " + std::to_string(r[1]) + ")");
    if (r[2] < 0 || r[2] >= m) throw ValidationError(prefix + "machine " + std::to_string(r[2]) + " out of range");
    if (r[3] < 1) throw ValidationError(prefix + "processing time " + std::to_string(r[3]) + " < 1");
    ops.push_back({r[2], r[3]});
  }
  int bad = 0;
  if (auto msg = check_ops(n, m, ops, &bad); !msg.empty())
    throw ValidationError("row " + std::to_string(bad) + ": " + msg);
  return Instance(n, m, std::move(ops));
}

namespace {

Instance generate(int n_jobs, int n_machines, std::uint64_t seed, bool shuffle_machines) {
  if (n_jobs < 1 || n_machines < 1) throw ValidationError("generator needs n >= 1 and m >= 1");
  std::vector<Operation> ops;
  ops.reserve(static_cast<std::size_t>(n_jobs * n_machines));
  std::vector<int> machines(static_cast<std::size_t>(n_machines));
  for (int i = 0; i < n_jobs; ++i) {
    // Stream layout per job: m processing times, then the machine shuffle.
    auto rng = Rng::derive(seed, {static_cast<std::uint64_t>(i)});
    std::vector<int> times(static_cast<std::size_t>(n_machines));
    for (auto& p : times) p = static_cast<int>(rng.uniform_int(1, 99));
    std::iota(machines.begin(), machines.end(), 0);
    if (shuffle_machines) rng.shuffle(std::span<int>(machines));
    for (int j = 0; j < n_machines; ++j) ops.push_back({machines[static_cast<std::size_t>(j)], times[static_cast<std::size_t>(j)]});
  }
  return Instance(n_jobs, n_machines, std::move(ops));
}

}  // namespace

Instance generate_taillard(int n_jobs, int n_machines, std::uint64_t seed) {
  return generate(n_jobs, n_machines, seed, true);
}

Instance generate_flowshop(int n_jobs, int n_machines, std::uint64_t seed) {
  return generate(n_jobs, n_machines, seed, false);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Token {
  long long value;
  int column;
};

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-blank, non-comment line split into integer tokens.
  std::optional<std::vector<Token>> next_line() {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      auto line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto tokens = tokenize(line);
      if (!tokens.empty()) return tokens;
    }
    ++line_no_;
    pos_ = text_.size();
    return std::nullopt;
  }

  int line() const noexcept { return line_no_; }

 private:
  std::vector<Token> tokenize(std::string_view line) const {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t') {
        ++i;
        continue;
      }
      if (line[i] == '#') break;
      const auto start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      long long v = 0;
      const auto* first = line.data() + start;
      const auto* last = line.data() + i;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last)
        throw ParseError(line_no_, static_cast<int>(start) + 1,
                         "expected an integer, found '" + std::string(first, last) + "'");
      out.push_back({v, static_cast<int>(start) + 1});
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

std::vector<Token> require_line(LineReader& reader, const std::string& what) {
  auto line = reader.next_line();
  if (!line) throw ParseError(reader.line(), 1, "unexpected end of input, expected " + what);
  return *line;
}

Instance parse_one(LineReader& reader) {
  auto header = require_line(reader, "header 'n m'");
  if (header.size() != 2)
    throw ParseError(reader.line(), header.size() > 2 ? header[2].column : 1, "header must contain exactly 'n m'");
  for (const auto& t : header)
    if (t.value < 1 || t.value > 100000) throw ParseError(reader.line(), t.column, "n and m must be positive");
  const int n = static_cast<int>(header[0].value);
  const int m = static_cast<int>(header[1].value);
  std::vector<Operation> ops;
  ops.reserve(static_cast<std::size_t>(n * m));
  for (int i = 0; i < n; ++i) {
    auto line = require_line(reader, "line for job " + std::to_string(i) + " of " + std::to_string(n));
    if (line.size() != static_cast<std::size_t>(2 * m))
      throw ParseError(reader.line(), line.size() > static_cast<std::size_t>(2 * m) ? line[static_cast<std::size_t>(2 * m)].column : 1,
                       "job " + std::to_string(i) + " has " + std::to_string(line.size()) + " values, expected " +
                           std::to_string(2 * m));
    std::vector<char> seen(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const auto& mt = line[static_cast<std::size_t>(2 * j)];
      const auto& pt = line[static_cast<std::size_t>(2 * j + 1)];
      if (mt.value < 0 || mt.value >= m)
        throw ParseError(reader.line(), mt.column, "machine " + std::to_string(mt.value) + " out of range");
      if (seen[static_cast<std::size_t>(mt.value)])
        throw ParseError(reader.line(), mt.column, "machine " + std::to_string(mt.value) + " repeated in job");
      seen[static_cast<std::size_t>(mt.value)] = 1;
      if (pt.value < 1 || pt.value > 1'000'000'000)
        throw ParseError(reader.line(), pt.column, "processing time must be >= 1");
      ops.push_back({static_cast<int>(mt.value), static_cast<int>(pt.value)});
    }
  }
  return Instance(n, m, std::move(ops));
}

void append_instance(std::string& out, const Instance& inst) {
  out += std::to_string(inst.n_jobs()) + ' ' + std::to_string(inst.n_machines()) + '\n';
  for (int i = 0; i < inst.n_jobs(); ++i) {
    for (int j = 0; j < inst.n_machines(); ++j) {
      if (j) out += ' ';
      out += std::to_string(inst.op(i, j).machine) + ' ' + std::to_string(inst.op(i, j).proc_time);
    }
    out += '\n';
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Instance read_instance(std::string_view text) {
  LineReader reader(text);
  auto inst = parse_one(reader);
  if (auto extra = reader.next_line())
    throw ParseError(reader.line(), extra->front().column, "trailing data after instance");
  return inst;
}

std::string write_instance(const Instance& inst) {
  std::string out;
  append_instance(out, inst);
  return out;
}

std::vector<Instance> read_dataset(std::string_view text) {
  LineReader reader(text);
  auto header = require_line(reader, "dataset count");
  if (header.size() != 1 || header[0].value < 0)
    throw ParseError(reader.line(), 1, "dataset header must be a single non-negative count");
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(header[0].value));
  for (long long c = 0; c < header[0].value; ++c) out.push_back(parse_one(reader));
  if (auto extra = reader.next_line())
    throw ParseError(reader.line(), extra->front().column, "trailing data after last instance");
  return out;
}

std::string write_dataset(std::span<const Instance> instances) {
  std::string out = std::to_string(instances.size()) + '\n';
  for (const auto& inst : instances) append_instance(out, inst);
  return out;
}

Instance read_instance_file(const std::string& path) { return read_instance(slurp(path)); }

std::vector<Instance> read_dataset_file(const std::string& path) { return read_dataset(slurp(path)); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace seqjsp
