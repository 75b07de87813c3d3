// Acceptance gate. Prints one PASS/FAIL line per criterion; exits nonzero if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "seqjsp/dispatch_rules.hpp"
#include "seqjsp/exact_oracle.hpp"
#include "seqjsp/gantt.hpp"
#include "seqjsp/masking.hpp"
#include "seqjsp/stats.hpp"
#include "seqjsp/trainer.hpp"

using namespace seqjsp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ModelConfig default_model(Precision p) {
  ModelConfig c;
  c.precision = p;
  return c;
}

// 1. Every sampled list is feasible, for random parameters and random shapes.
Outcome feasibility() {
  constexpr int kPairs = 200;
  constexpr int kSamples = 50;
  Rng rng(101);
  int bad = 0, total = 0;
  for (int pair = 0; pair < kPairs; ++pair) {
    const int n = static_cast<int>(rng.uniform_int(1, 10));
    const int m = static_cast<int>(rng.uniform_int(1, 10));
    const std::vector<Instance> one = {generate_taillard(n, m, rng.next())};
    PolicyModel<float> model(default_model(Precision::F32), rng.next());
    Rng sampler(rng.next());
    for (const auto& r : rollout(model, one, DecodeMode::Sample, &sampler, BuildMode::GapInsert, kSamples)) {
      ++total;
      if (!check_feasible(r.list, one[0]).feasible || !(r.log_prob <= 0.0) || !std::isfinite(r.log_prob)) ++bad;
    }
  }
  std::ostringstream d;
  d << total << " rollouts, " << bad << " infeasible";
  return {bad == 0 && total == kPairs * kSamples, d.str()};
}

// 2. Legal decode trajectories counted exhaustively.
Outcome trajectory_counts() {
  struct Case {
    int n, m;
    ProblemMode mode;
    std::uint64_t expected;
  };
  const Case cases[] = {{2, 2, ProblemMode::JSP, 6},
                        {2, 3, ProblemMode::JSP, 20},
                        {3, 2, ProblemMode::JSP, 90},
                        {2, 2, ProblemMode::OSP, 24}};
  std::ostringstream d;
  bool ok = true;
  for (const auto& c : cases) {
    const auto got = enumerate_trajectories(c.n, c.m, c.mode);
    ok = ok && got == c.expected;
    d << c.n << "x" << c.m << (c.mode == ProblemMode::JSP ? " jsp=" : " osp=") << got << " ";
  }
  return {ok, d.str()};
}

// 3. Replay of the 3x4 reference list.
Outcome worked_example() {
  const auto inst = fixtures::worked_3x4();
  const auto list = fixtures::worked_3x4_list();
  const auto gap = build_schedule(inst, list, BuildMode::GapInsert);
  const auto app = build_schedule(inst, list, BuildMode::Append);
  const int horizon = gantt_layout(gap).horizon;
  std::ostringstream d;
  d << "gap-insert " << gap.makespan() << ", append " << app.makespan() << ", gantt horizon " << horizon;
  return {gap.makespan() == 27 && app.makespan() == 27 && horizon == 27, d.str()};
}

// 4. Oracle and rules on the 2x3 instance.
Outcome oracle_cross_check() {
  const auto inst = fixtures::small_2x3();
  OracleOptions plain;
  plain.prune = false;
  const auto opt = optimal_makespan(inst, plain);
  const int mwkr = build_schedule(inst, run_pdr(inst, RuleKind::MWKR)).makespan();
  const int spt = build_schedule(inst, run_pdr(inst, RuleKind::SPT), BuildMode::Append).makespan();
  std::ostringstream d;
  d << "optimum " << opt.optimal_makespan << " over " << opt.leaves << " lists, MWKR " << mwkr << " (gap "
    << gap(mwkr, opt.optimal_makespan) << "), SPT append " << spt << " (gap " << gap(spt, opt.optimal_makespan)
    << ")";
  const bool ok = opt.certified && opt.optimal_makespan == 18 && opt.leaves == 20 && mwkr == 18 && spt == 33 &&
                  gap(mwkr, 18) == 0.0 && std::abs(gap(spt, 18) - 15.0 / 18.0) < 1e-12;
  return {ok, d.str()};
}

// 5. Analytic vs central-difference gradients of log P.
Outcome gradient_check() {
  constexpr int kPairs = 10;
  constexpr int kCoords = 5;
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  constexpr double kFloor = 1e-6;  // denominators below this are treated as this
  Rng rng(505);
  double worst = 0;
  int checked = 0;
  for (int pair = 0; pair < kPairs; ++pair) {
    const int n = static_cast<int>(rng.uniform_int(2, 4));
    const int m = static_cast<int>(rng.uniform_int(2, 4));
    const std::vector<Instance> one = {generate_taillard(n, m, rng.next())};
    PolicyModel<double> model(default_model(Precision::F64), rng.next());
    Rng sampler(rng.next());
    const std::vector<DispatchList> lists = {rollout(model, one, DecodeMode::Sample, &sampler)[0].list};
    const std::vector<double> w = {1.0};
    const auto analytic = log_prob_and_grad(model, one, lists, w).grad;
    const auto flat = model.flat_parameters();
    for (int c = 0; c < kCoords; ++c) {
      const auto k = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(flat.size()) - 1));
      auto eval = [&](double delta) {
        auto shifted = flat;
        shifted[k] += delta;
        PolicyModel<double> moved = model;
        moved.set_flat_parameters(shifted);
        return log_prob_and_grad(moved, one, lists, w).log_probs[0];
      };
      const double fd = (eval(kStep) - eval(-kStep)) / (2 * kStep);
      const double rel = std::abs(analytic[k] - fd) / std::max({std::abs(analytic[k]), std::abs(fd), kFloor});
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  std::ostringstream d;
  d << checked << " coordinates, worst relative error " << worst;
  return {checked >= 50 && worst <= kTol, d.str()};
}

// Exact and sampled REINFORCE gradients with zero baseline on the 2x3 instance.
double estimator_cosine(const PolicyModel<double>& model, std::uint64_t seed, double* prob_total) {
  constexpr int kSamples = 100000;
  constexpr int kChunk = 10000;
  const std::vector<Instance> one = {fixtures::small_2x3()};
  std::map<std::vector<int>, int> counts;
  Rng rng(seed);
  for (int done = 0; done < kSamples; done += kChunk)
    for (const auto& r : rollout(model, one, DecodeMode::Sample, &rng, BuildMode::GapInsert, kChunk))
      ++counts[r.list.perm];
  const auto P = model.parameter_count();
  std::vector<double> exact(P, 0.0), empirical(P, 0.0);
  *prob_total = 0;
  enumerate_trajectories(2, 3, ProblemMode::JSP, [&](const std::vector<int>& perm) {
    const std::vector<DispatchList> lists = {DispatchList{perm}};
    const std::vector<double> w = {1.0};
    const auto lg = log_prob_and_grad(model, one, lists, w);
    const double p = std::exp(lg.log_probs[0]);
    const double cost = build_schedule(one[0], lists[0]).makespan();
    const double freq = static_cast<double>(counts[perm]) / kSamples;
    *prob_total += p;
    for (std::size_t k = 0; k < P; ++k) {
      exact[k] += p * cost * lg.grad[k];
      empirical[k] += freq * cost * lg.grad[k];
    }
  });
  double dot = 0, ne = 0, nm = 0;
  for (std::size_t k = 0; k < P; ++k) {
    dot += exact[k] * empirical[k];
    ne += exact[k] * exact[k];
    nm += empirical[k] * empirical[k];
  }
  return dot / std::sqrt(ne * nm);
}

// 6. Sampled estimator vs the exact expectation over all 20 lists.
Outcome estimator_sanity() {
  PolicyModel<double> uniform(default_model(Precision::F64), 606);
  uniform.zero_pointer();
  PolicyModel<double> random(default_model(Precision::F64), 607);
  double pu = 0, pr = 0;
  const double cu = estimator_cosine(uniform, 1, &pu);
  const double cr = estimator_cosine(random, 2, &pr);
  std::ostringstream d;
  d << "cosine uniform policy " << cu << ", random policy " << cr << " (probability mass " << pu << ", " << pr << ")";
  return {cu > 0.9 && cr > 0.9 && std::abs(pu - 1) < 1e-9 && std::abs(pr - 1) < 1e-9, d.str()};
}

// 7. Greedy baseline vs zero baseline: summed per-coordinate variance of (C - b) grad log P.
Outcome variance_reduction() {
  constexpr int kSamples = 10000;
  const std::vector<Instance> one = {generate_taillard(3, 3, 77)};
  PolicyModel<double> model(default_model(Precision::F64), 707);
  const double b = rollout(model, one, DecodeMode::Greedy)[0].makespan;
  Rng rng(7);
  std::map<std::vector<int>, int> counts;
  for (const auto& r : rollout(model, one, DecodeMode::Sample, &rng, BuildMode::GapInsert, kSamples))
    ++counts[r.list.perm];
  const auto P = model.parameter_count();
  std::vector<double> m1z(P, 0), m2z(P, 0), m1g(P, 0), m2g(P, 0);
  for (const auto& [perm, count] : counts) {
    const std::vector<DispatchList> lists = {DispatchList{perm}};
    const std::vector<double> w = {1.0};
    const auto g = log_prob_and_grad(model, one, lists, w).grad;
    const double f = static_cast<double>(count) / kSamples;
    const double c = build_schedule(one[0], lists[0]).makespan();
    for (std::size_t k = 0; k < P; ++k) {
      const double xz = c * g[k], xg = (c - b) * g[k];
      m1z[k] += f * xz;
      m2z[k] += f * xz * xz;
      m1g[k] += f * xg;
      m2g[k] += f * xg * xg;
    }
  }
  double vz = 0, vg = 0;
  std::size_t lower = 0;
  for (std::size_t k = 0; k < P; ++k) {
    const double a = m2z[k] - m1z[k] * m1z[k];
    const double c = m2g[k] - m1g[k] * m1g[k];
    vz += a;
    vg += c;
    if (c <= a) ++lower;
  }
  std::ostringstream d;
  d << counts.size() << " distinct lists, greedy baseline " << b << ", summed variance zero-baseline " << vz
    << " vs greedy-baseline " << vg << " (" << lower << "/" << P << " coordinates lower)";
  return {vg <= vz, d.str()};
}

// 8. Paired t-test decisions.
Outcome ttest() {
  Rng rng(808);
  std::vector<double> diffs(100);
  for (auto& x : diffs) {
    const double u1 = 1.0 - rng.uniform01(), u2 = rng.uniform01();
    x = -3.0 + std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
  }
  const auto r = paired_ttest(diffs, 0.05);
  // One-sided critical values from printed t tables: (df, t, upper-tail probability).
  struct Row {
    double df, t, alpha;
  };
  const Row table[] = {{1, 12.706, 0.025}, {5, 4.032, 0.005}, {10, 2.228, 0.025},
                       {20, 3.552, 0.001}, {30, 2.750, 0.005}, {100, 3.390, 0.0005}};
  double worst = 0;
  for (const auto& row : table)
    worst = std::max(worst, std::abs(student_t_cdf(-row.t, row.df) - row.alpha) / row.alpha);
  // Critical value for df = 99 at 0.0005 is above 3.390, so t below -3.4 already gives p < 5e-4.
  PolicyModel<float> model(default_model(Precision::F32), 808);
  TrainerConfig cfg;
  cfg.baseline_eval_size = 50;
  cfg.seed = 8;
  DataConfig data;
  auto baseline = make_baseline(model, cfg, data);
  const auto same = ttest_update(model, baseline, cfg, data);
  std::ostringstream d;
  d << "t = " << r.t << ", p = " << r.p_value << ", replace " << r.replace << "; table max relative error " << worst
    << "; identical models replace " << same.replace;
  const bool ok = r.replace && r.p_value < 1e-4 && r.t < -3.4 && worst < 0.01 && !same.replace;
  return {ok, d.str()};
}

// 9. Desk-scale training on 6x6.
Outcome desk_learning() {
  constexpr int kSeeds = 10;
  constexpr int kNeeded = 8;
  DataConfig data;  // 6x6 Taillard, gap-insert, 100 held-out instances
  const auto validation =
      generate_dataset(data.kind, data.n_jobs, data.n_machines, data.validation_size, data.validation_seed);
  std::vector<int> spt;
  for (const auto& inst : validation) spt.push_back(build_schedule(inst, run_pdr(inst, RuleKind::SPT)).makespan());
  const double spt_mean = mean_of(spt);
  int passed = 0;
  std::ostringstream d;
  d << "SPT " << spt_mean << ";";
  for (int seed = 1; seed <= kSeeds; ++seed) {
    TrainerConfig cfg;  // lr 1e-5, clip 0.5, batch 64, epoch 2000, 10 epochs
    cfg.seed = static_cast<std::uint64_t>(seed);
    PolicyModel<float> model(default_model(Precision::F32), model_init_seed(cfg.seed));
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = train(model, cfg, data);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double first = r.validation_means.front(), last = r.validation_means.back();
    const bool ok = last < first && last <= 0.95 * spt_mean;
    passed += ok;
    d << " seed " << seed << ": " << first << " -> " << last << " (" << static_cast<int>(secs) << "s)"
      << (ok ? "" : " miss") << ";";
    std::fprintf(stderr, "  [9] seed %d: %.2f -> %.2f, SPT %.2f, %.0fs\n", seed, first, last, spt_mean, secs);
  }
  d << " " << passed << "/" << kSeeds << " seeds";
  return {passed >= kNeeded, d.str()};
}

// 10. Active search on the 2x3 instance from random initialization.
Outcome active_search_optimum() {
  const auto inst = fixtures::small_2x3();
  int hits = 0;
  std::ostringstream d;
  d << "steps to 18:";
  for (int seed = 1; seed <= 10; ++seed) {
    PolicyModel<float> model(default_model(Precision::F32), static_cast<std::uint64_t>(1000 + seed));
    ActiveSearchConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto r = active_search(model, inst, cfg);
    bool monotone = true;
    for (std::size_t k = 1; k < r.history.size(); ++k) monotone = monotone && r.history[k] <= r.history[k - 1];
    int step = -1;
    for (std::size_t k = 0; k < r.history.size(); ++k)
      if (r.history[k] == 18) {
        step = static_cast<int>(k);
        break;
      }
    if (r.best_makespan == 18 && monotone) ++hits;
    d << " " << step;
  }
  d << "; " << hits << "/10 seeds";
  return {hits >= 9, d.str()};
}

// 11. EAS-Emb on 10x10 against plain sampling with the same budget.
Outcome eas() {
  constexpr int kSeeds = 10;
  constexpr int kInstances = 100;
  // A briefly trained 10x10 model.
  TrainerConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.epoch_size = 640;
  cfg.n_epochs = 1;
  cfg.baseline_eval_size = 100;
  cfg.seed = 1111;
  DataConfig data;
  data.n_jobs = 10;
  data.n_machines = 10;
  data.validation_size = 20;
  PolicyModel<float> model(default_model(Precision::F32), 1111);
  const auto tr = train(model, cfg, data);
  const auto frozen = serialize_checkpoint(model);

  int wins = 0;
  bool weights_same = true, monotone = true;
  std::ostringstream d;
  d << "training greedy " << tr.validation_means.front() << " -> " << tr.validation_means.back() << ";";
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto insts =
        generate_dataset(InstanceKind::JSP, 10, 10, kInstances, Rng::derive(static_cast<std::uint64_t>(seed), {3}).next());
    EasConfig ec;
    ec.seed = static_cast<std::uint64_t>(seed);
    const auto e = eas_emb(model, insts, ec);
    const auto s = sampling_search(model, insts, ec);
    weights_same = weights_same && serialize_checkpoint(model) == frozen;
    double me = 0, ms = 0;
    for (std::size_t k = 0; k < insts.size(); ++k) {
      me += e[k].best_makespan;
      ms += s[k].best_makespan;
      for (std::size_t t = 1; t < e[k].history.size(); ++t) monotone = monotone && e[k].history[t] <= e[k].history[t - 1];
    }
    me /= kInstances;
    ms /= kInstances;
    wins += me <= ms;
    d << " " << me << (me <= ms ? "<=" : ">") << ms;
    std::fprintf(stderr, "  [11] seed %d: eas %.2f sampling %.2f\n", seed, me, ms);
  }
  d << "; weights unchanged " << weights_same << ", monotone " << monotone << ", " << wins << "/" << kSeeds;
  return {weights_same && monotone && wins >= 8, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, feasibility},         {2, trajectory_counts},     {3, worked_example}, {4, oracle_cross_check},
      {5, gradient_check},      {6, estimator_sanity},      {7, variance_reduction}, {8, ttest},
      {9, desk_learning},       {10, active_search_optimum}, {11, eas}};
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::stoi(argv[k]));
  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
