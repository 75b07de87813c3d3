#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "seqjsp/gantt.hpp"
#include "seqjsp/masking.hpp"
#include "seqjsp/rng.hpp"
#include "seqjsp/schedule.hpp"

using namespace seqjsp;

namespace {

// Reference replay on an explicit unit-time grid.
std::vector<int> grid_replay(const Instance& inst, const DispatchList& list, bool gaps) {
  const int horizon = 100000;
  std::vector<std::vector<char>> busy(static_cast<std::size_t>(inst.n_machines()), std::vector<char>(horizon, 0));
  std::vector<int> tail(static_cast<std::size_t>(inst.n_machines()), 0);
  std::vector<int> ready(static_cast<std::size_t>(inst.n_jobs()), 0);
  std::vector<int> starts(static_cast<std::size_t>(inst.n_ops()), -1);
  for (int row : list.perm) {
    const int job = row / inst.n_machines();
    const auto& op = inst.op(row);
    auto& line = busy[static_cast<std::size_t>(op.machine)];
    int t = gaps ? ready[static_cast<std::size_t>(job)]
                 : std::max(ready[static_cast<std::size_t>(job)], tail[static_cast<std::size_t>(op.machine)]);
    for (;; ++t) {
      bool free = true;
      for (int u = t; u < t + op.proc_time && free; ++u) free = !line[static_cast<std::size_t>(u)];
      if (free) break;
    }
    for (int u = t; u < t + op.proc_time; ++u) line[static_cast<std::size_t>(u)] = 1;
    starts[static_cast<std::size_t>(row)] = t;
    ready[static_cast<std::size_t>(job)] = t + op.proc_time;
    tail[static_cast<std::size_t>(op.machine)] = std::max(tail[static_cast<std::size_t>(op.machine)], t + op.proc_time);
  }
  return starts;
}

DispatchList random_feasible_list(const Instance& inst, Rng& rng) {
  auto masks = init_masks(1, inst.n_jobs(), inst.n_machines());
  DispatchList list;
  for (int s = 0; s < inst.n_ops(); ++s) {
    auto rows = masks.selectable_rows(0);
    const int row = rows[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(rows.size()) - 1))];
    masks.step(0, row);
    list.perm.push_back(row);
  }
  return list;
}

}  // namespace

TEST_CASE("3x4 reference list replays to makespan 27 in both modes") {
  const auto inst = fixtures::worked_3x4();
  const auto list = fixtures::worked_3x4_list();
  for (auto mode : {BuildMode::GapInsert, BuildMode::Append}) {
    const auto s = build_schedule(inst, list, mode);
    CHECK(s.makespan() == 27);
    CHECK(makespan(s) == 27);
    CHECK(validate_schedule(s, inst).empty());
    CHECK(gantt_layout(s).horizon == 27);
  }
  // Append keeps list order per machine; gap insertion moves O(0,3) into the idle slot on M3.
  CHECK(build_schedule(inst, list, BuildMode::Append).at(0, 3).start == 20);
  CHECK(build_schedule(inst, list, BuildMode::GapInsert).at(0, 3).start == 16);
}

TEST_CASE("2x3 instance: SPT-order list gives 33 appended and 18 with gap insertion") {
  const auto inst = fixtures::small_2x3();
  const std::vector<std::pair<int, int>> jp = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
  const auto list = make_list(jp, 3);
  CHECK(build_schedule(inst, list, BuildMode::Append).makespan() == 33);
  CHECK(build_schedule(inst, list, BuildMode::GapInsert).makespan() == 18);
}

TEST_CASE("builder agrees with a unit-grid replay on random lists") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 5));
    const int m = static_cast<int>(rng.uniform_int(1, 5));
    const auto inst = generate_taillard(n, m, rng.next());
    const auto list = random_feasible_list(inst, rng);
    for (bool gaps : {false, true}) {
      const auto s = build_schedule(inst, list, gaps ? BuildMode::GapInsert : BuildMode::Append);
      const auto ref = grid_replay(inst, list, gaps);
      for (int r = 0; r < inst.n_ops(); ++r) CHECK(s.at(r / m, r % m).start == ref[static_cast<std::size_t>(r)]);
    }
  }
}

TEST_CASE("schedule properties on random feasible lists") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 7));
    const int m = static_cast<int>(rng.uniform_int(1, 7));
    const auto inst = generate_taillard(n, m, rng.next());
    const auto list = random_feasible_list(inst, rng);
    REQUIRE(check_feasible(list, inst).feasible);
    const auto gap = build_schedule(inst, list, BuildMode::GapInsert);
    const auto app = build_schedule(inst, list, BuildMode::Append);
    CHECK(validate_schedule(gap, inst).empty());
    CHECK(validate_schedule(app, inst).empty());
    CHECK(gap.makespan() >= makespan_lower_bound(inst));
    CHECK(gap.makespan() <= app.makespan());
    for (int r = 0; r < inst.n_ops(); ++r) CHECK(gap.at(r / m, r % m).start <= app.at(r / m, r % m).start);
    // Semi-active: every start is 0, a job predecessor's end or a machine predecessor's end.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        const auto& e = gap.at(i, j);
        bool tight = e.start == 0 || (j > 0 && gap.at(i, j - 1).end == e.start);
        for (const auto& other : gap.entries()) tight |= other.machine == e.machine && other.end == e.start;
        CHECK(tight);
      }
  }
}

TEST_CASE("infeasible lists report the first violating pair") {
  const auto inst = fixtures::small_2x3();
  const std::vector<std::pair<int, int>> jp = {{0, 1}, {0, 0}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
  const auto list = make_list(jp, 3);
  const auto report = check_feasible(list, inst);
  REQUIRE_FALSE(report.feasible);
  CHECK(report.violation->job == 0);
  CHECK(report.violation->ahead_pos == 1);
  CHECK(report.violation->behind_pos == 0);
  CHECK(report.violation->ahead_index == 0);
  CHECK(report.violation->behind_index == 1);
  CHECK_THROWS_AS(build_schedule(inst, list), ValidationError);
  CHECK_THROWS_AS(check_feasible(DispatchList{{0, 1, 2}}, inst), ValidationError);
  CHECK_THROWS_AS(check_feasible(DispatchList{{0, 0, 1, 2, 3, 4}}, inst), ValidationError);
}

TEST_CASE("1x1 instance is one box") {
  const Instance inst(1, 1, {{0, 7}});
  const auto s = build_schedule(inst, DispatchList{{0}});
  CHECK(s.makespan() == 7);
  const auto layout = gantt_layout(s);
  REQUIRE(layout.rows.size() == 1);
  CHECK(layout.rows[0].size() == 1);
  const auto svg = render_gantt_svg(s);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("data-job=\"0\"") != std::string::npos);
}

TEST_CASE("gantt renderings of the 3x4 reference schedule") {
  const auto s = build_schedule(fixtures::worked_3x4(), fixtures::worked_3x4_list());
  const auto layout = gantt_layout(s);
  CHECK(layout.rows.size() == 4);
  std::size_t boxes = 0;
  for (const auto& row : layout.rows) {
    boxes += row.size();
    for (std::size_t k = 1; k < row.size(); ++k) CHECK(row[k - 1].end <= row[k].start);
  }
  CHECK(boxes == 12);
  const auto svg = render_gantt_svg(s);
  std::size_t rects = 0;
  for (auto p = svg.find("data-job="); p != std::string::npos; p = svg.find("data-job=", p + 1)) ++rects;
  CHECK(rects == 12);
  const auto text = render_gantt_text(s);
  CHECK(text.find("horizon 27") != std::string::npos);
  CHECK(text.find("M3 |") != std::string::npos);
}

TEST_CASE("schedule csv has one row per operation") {
  const std::vector<std::pair<int, int>> jp = {{1, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 2}, {0, 2}};
  const auto s = build_schedule(fixtures::small_2x3(), make_list(jp, 3));
  CHECK(s.makespan() == 18);
  const auto csv = schedule_csv(s);
  CHECK(csv.rfind("job,pos,machine,start,end\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
