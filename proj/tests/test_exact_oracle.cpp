#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "fixtures.hpp"
#include "seqjsp/dispatch_rules.hpp"
#include "seqjsp/exact_oracle.hpp"
#include "seqjsp/masking.hpp"
#include "seqjsp/rng.hpp"

using namespace seqjsp;

namespace {

int brute_force(const Instance& inst, BuildMode mode) {
  int best = std::numeric_limits<int>::max();
  enumerate_trajectories(inst.n_jobs(), inst.n_machines(), ProblemMode::JSP, [&](const std::vector<int>& perm) {
    best = std::min(best, build_schedule(inst, DispatchList{perm}, mode).makespan());
  });
  return best;
}

}  // namespace

TEST_CASE("2x3 instance: optimum 18 over 20 lists") {
  const auto inst = fixtures::small_2x3();
  OracleOptions plain;
  plain.prune = false;
  const auto full = optimal_makespan(inst, plain);
  CHECK(full.optimal_makespan == 18);
  CHECK(full.leaves == 20);
  CHECK(full.certified);
  const auto pruned = optimal_makespan(inst);
  CHECK(pruned.optimal_makespan == 18);
  CHECK(pruned.certified);
  CHECK(build_schedule(inst, pruned.optimal_list).makespan() == 18);
  CHECK(gap(18, 18) == 0.0);
  CHECK(gap(33, 18) == doctest::Approx(15.0 / 18.0));
}

TEST_CASE("pruned search matches brute force on random small instances") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 3));
    const int m = static_cast<int>(rng.uniform_int(1, 4));
    const auto inst = generate_taillard(n, m, rng.next());
    for (auto mode : {BuildMode::GapInsert, BuildMode::Append}) {
      OracleOptions opt;
      opt.mode = mode;
      const auto r = optimal_makespan(inst, opt);
      REQUIRE(r.certified);
      CHECK(r.optimal_makespan == brute_force(inst, mode));
      CHECK(r.optimal_makespan >= makespan_lower_bound(inst));
      CHECK(build_schedule(inst, r.optimal_list, mode).makespan() == r.optimal_makespan);
      for (auto rule : kAllRules) CHECK(r.optimal_makespan <= build_schedule(inst, run_pdr(inst, rule), mode).makespan());
    }
  }
}

TEST_CASE("exhausted budget returns an uncertified feasible incumbent") {
  const auto inst = generate_taillard(4, 4, 3);
  const auto r = optimal_makespan(inst, std::uint64_t{5});
  CHECK_FALSE(r.certified);
  CHECK(r.explored <= 5);
  REQUIRE(r.optimal_list.size() == 16);
  CHECK(check_feasible(r.optimal_list, inst).feasible);
  CHECK(build_schedule(inst, r.optimal_list).makespan() == r.optimal_makespan);
  CHECK_THROWS_AS(optimal_makespan(inst, std::uint64_t{0}), ValidationError);
  CHECK_THROWS_AS(gap(10, 0), ValidationError);
}
