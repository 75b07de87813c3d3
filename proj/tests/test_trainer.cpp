#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "seqjsp/trainer.hpp"

using namespace seqjsp;

namespace {

ModelConfig tiny(Precision p = Precision::F64) {
  ModelConfig c;
  c.d_h = 8;
  c.n_heads = 2;
  c.n_layers = 1;
  c.ff_width = 16;
  c.precision = p;
  return c;
}

TrainerConfig quick_trainer() {
  TrainerConfig t;
  t.learning_rate = 1e-3;
  t.batch_size = 8;
  t.epoch_size = 16;
  t.n_epochs = 2;
  t.baseline_eval_size = 10;
  t.seed = 3;
  t.log_every = 1;
  return t;
}

DataConfig quick_data() {
  DataConfig d;
  d.n_jobs = 3;
  d.n_machines = 3;
  d.validation_size = 6;
  return d;
}

}  // namespace

TEST_CASE("dataset generation is seeded and typed") {
  const auto a = generate_dataset(InstanceKind::JSP, 3, 4, 5, 9);
  const auto b = generate_dataset(InstanceKind::JSP, 3, 4, 5, 9);
  CHECK(a == b);
  CHECK(a[0] != a[1]);
  for (const auto& inst : generate_dataset(InstanceKind::FSP, 3, 4, 5, 9))
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 4; ++k) CHECK(inst.op(j, k).machine == k);
  CHECK(parse_instance_kind("fsp") == InstanceKind::FSP);
  CHECK_THROWS_AS(parse_instance_kind("osp"), ValidationError);
}

TEST_CASE("adam first step moves every coordinate by the learning rate") {
  Adam adam(0.1, 0.9, 0.999, 1e-12, 3);
  std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> g = {0.5, -2.0, 1e-3};
  adam.step<double>(x, g);
  CHECK(x[0] == doctest::Approx(0.9));
  CHECK(x[1] == doctest::Approx(2.1));
  CHECK(x[2] == doctest::Approx(2.9));
  CHECK(adam.steps == 1);
  std::vector<double> zero(3, 0.0);
  Adam fresh(0.1, 0.9, 0.999, 1e-8, 3);
  auto y = x;
  fresh.step<double>(y, zero);
  CHECK(y == x);
}

TEST_CASE("global norm clipping") {
  std::vector<double> g = {3.0, 4.0};
  CHECK(clip_global_norm<double>(g, 0.5) == doctest::Approx(5.0));
  CHECK(g[0] == doctest::Approx(0.3));
  CHECK(g[1] == doctest::Approx(0.4));
  std::vector<float> small = {0.1f, 0.1f};
  clip_global_norm<float>(small, 0.5);
  CHECK(small[0] == 0.1f);
}

TEST_CASE("zero advantage gives a zero gradient and no parameter change") {
  PolicyModel<double> model(tiny(), 1);
  const auto batch = generate_dataset(InstanceKind::JSP, 3, 3, 4, 1);
  Rng rng(2);
  auto pg = sample_policy_gradient<double>(
      model, batch, 2, [](std::span<const int> c) { return std::vector<double>(c.begin(), c.end()); },
      BuildMode::GapInsert, rng, ad::NormMode::TrainFrozen);
  for (double g : pg.grad) CHECK(g == 0.0);
  const auto before = model.flat_parameters();
  auto params = model.flat_parameters();
  Adam adam(1e-3, 0.9, 0.999, 1e-8, params.size());
  adam.step<double>(params, pg.grad);
  CHECK(params == before);
}

TEST_CASE("sampled gradient equals the teacher-forced gradient") {
  PolicyModel<double> model(tiny(), 4);
  const auto batch = generate_dataset(InstanceKind::JSP, 3, 3, 3, 5);
  Rng rng(6);
  auto pg = sample_policy_gradient<double>(
      model, batch, 2, [](std::span<const int> c) { return std::vector<double>(c.size(), 20.0); },
      BuildMode::GapInsert, rng, ad::NormMode::TrainFrozen);
  std::vector<Instance> lanes;
  for (const auto& inst : batch) lanes.insert(lanes.end(), 2, inst);
  std::vector<double> w(pg.costs.size());
  for (std::size_t l = 0; l < w.size(); ++l) w[l] = (pg.costs[l] - 20.0) / static_cast<double>(w.size());
  // Duplicating every instance leaves the batch mean and biased variance unchanged.
  const auto ref = log_prob_and_grad(model, lanes, pg.lists, w, ad::NormMode::TrainFrozen);
  REQUIRE(ref.grad.size() == pg.grad.size());
  for (std::size_t l = 0; l < pg.log_probs.size(); ++l) CHECK(std::abs(ref.log_probs[l] - pg.log_probs[l]) <= 1e-6);
  double worst = 0;
  for (std::size_t k = 0; k < pg.grad.size(); ++k) worst = std::max(worst, std::abs(ref.grad[k] - pg.grad[k]));
  CHECK(worst <= 1e-6);
}

TEST_CASE("train mode updates running statistics, frozen mode does not") {
  PolicyModel<double> model(tiny(), 7);
  const auto batch = generate_dataset(InstanceKind::JSP, 3, 3, 4, 8);
  auto base = [](std::span<const int> c) { return std::vector<double>(c.size(), 0.0); };
  Rng r1(1), r2(1);
  const auto train = sample_policy_gradient<double>(model, batch, 1, base, BuildMode::GapInsert, r1);
  const auto frozen =
      sample_policy_gradient<double>(model, batch, 1, base, BuildMode::GapInsert, r2, ad::NormMode::TrainFrozen);
  CHECK(train.norm_stats != model.norm_stats());
  CHECK(frozen.norm_stats == model.norm_stats());
}

TEST_CASE("identical models never replace the baseline") {
  PolicyModel<double> model(tiny(), 9);
  auto cfg = quick_trainer();
  const auto data = quick_data();
  auto baseline = make_baseline(model, cfg, data);
  CHECK(baseline.eval_set.size() == 10);
  const auto r = ttest_update(model, baseline, cfg, data);
  CHECK_FALSE(r.replace);
  CHECK(baseline.eval_generation == 0);
}

TEST_CASE("training is deterministic in double precision and writes artifacts") {
  const auto dir = std::filesystem::temp_directory_path() / "seqjsp_test_train";
  std::filesystem::remove_all(dir);
  const auto cfg = quick_trainer();
  const auto data = quick_data();
  PolicyModel<double> a(tiny(), 11), b(tiny(), 11);
  TrainOptions opt;
  opt.out_dir = dir.string();
  const auto ra = train(a, cfg, data, opt);
  const auto rb = train(b, cfg, data);
  CHECK(a == b);
  CHECK(ra.validation_means == rb.validation_means);
  CHECK(ra.validation_means.size() == 3);
  CHECK(ra.epochs_done == 2);
  CHECK(ra.state.adam_step == 4);
  CHECK(ra.log.size() == 4);
  for (const char* f : {"train_log.csv", "epoch_001.ckpt", "epoch_002.ckpt", "last.ckpt", "metrics.txt"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream log(dir / "train_log.csv");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 5);
  const auto ck = load_checkpoint((dir / "last.ckpt").string());
  CHECK(std::get<PolicyModel<double>>(ck.model) == a);
  CHECK(*ck.training == ra.state);
  CHECK(*ck.shape == TrainedShape{3, 3});
  std::filesystem::remove_all(dir);
}

TEST_CASE("resuming reproduces an uninterrupted run") {
  auto cfg = quick_trainer();
  const auto data = quick_data();
  PolicyModel<double> full(tiny(), 12);
  train(full, cfg, data);

  PolicyModel<double> part(tiny(), 12);
  auto first = cfg;
  first.n_epochs = 1;
  const auto r1 = train(part, first, data);
  TrainOptions opt;
  opt.resume = r1.state;
  const auto r2 = train(part, cfg, data, opt);
  CHECK(r2.epochs_done == 2);
  CHECK(part == full);
}

TEST_CASE("a fixed dataset is shuffled per epoch and checked for shape") {
  PolicyModel<double> model(tiny(), 13);
  TrainOptions opt;
  opt.dataset = generate_dataset(InstanceKind::JSP, 3, 3, 8, 1);
  CHECK_NOTHROW(train(model, quick_trainer(), quick_data(), opt));
  opt.dataset = generate_dataset(InstanceKind::JSP, 4, 3, 8, 1);
  CHECK_THROWS_AS(train(model, quick_trainer(), quick_data(), opt), ValidationError);
  auto bad = quick_trainer();
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(model, bad, quick_data()), ValidationError);
}

TEST_CASE("single precision training runs") {
  PolicyModel<float> model(tiny(Precision::F32), 14);
  const auto r = train(model, quick_trainer(), quick_data());
  for (double v : r.validation_means) CHECK(std::isfinite(v));
}

TEST_CASE("active search keeps a monotone incumbent") {
  PolicyModel<double> model(tiny(), 15);
  const auto inst = generate_taillard(3, 3, 2);
  ActiveSearchConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 8;
  const auto r = active_search(model, inst, cfg);
  CHECK(r.history.size() == 6);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  CHECK(build_schedule(inst, r.best_list).makespan() == r.best_makespan);
  cfg.steps = 0;
  const auto none = active_search(model, inst, cfg);
  CHECK(none.history.size() == 1);
  CHECK(none.best_makespan == none.history[0]);
}

TEST_CASE("embedding search leaves weights alone and never ends worse than greedy") {
  PolicyModel<double> model(tiny(), 16);
  const auto copy = model;
  const auto insts = generate_dataset(InstanceKind::JSP, 3, 3, 7, 4);
  EasConfig cfg;
  cfg.steps = 4;
  cfg.samples = 3;
  cfg.chunk = 3;
  const auto eas = eas_emb(model, insts, cfg);
  const auto smp = sampling_search(model, insts, cfg);
  CHECK(model == copy);
  REQUIRE(eas.size() == 7);
  REQUIRE(smp.size() == 7);
  const auto greedy = rollout(model, std::span<const Instance>(insts), DecodeMode::Greedy);
  for (std::size_t k = 0; k < insts.size(); ++k) {
    CHECK(eas[k].history.size() == 5);
    CHECK(eas[k].history[0] == greedy[k].makespan);
    CHECK(eas[k].best_makespan <= greedy[k].makespan);
    CHECK(smp[k].best_makespan <= greedy[k].makespan);
    for (std::size_t s = 1; s < eas[k].history.size(); ++s) CHECK(eas[k].history[s] <= eas[k].history[s - 1]);
    CHECK(build_schedule(insts[k], eas[k].best_list).makespan() == eas[k].best_makespan);
  }
  // The first step uses the unmodified embedding, so both searches see the same draws.
  for (std::size_t k = 0; k < insts.size(); ++k) CHECK(eas[k].history[1] == smp[k].history[1]);
}
