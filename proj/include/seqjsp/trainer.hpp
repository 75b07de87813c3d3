#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqjsp/checkpoint.hpp"
#include "seqjsp/policy.hpp"
#include "seqjsp/stats.hpp"

namespace seqjsp {

enum class InstanceKind { JSP, FSP };

InstanceKind parse_instance_kind(std::string_view s);
std::string_view to_string(InstanceKind kind);

/// Seed for a model's initial weights, derived from the run seed.
std::uint64_t model_init_seed(std::uint64_t seed);

Instance generate_instance(InstanceKind kind, int n_jobs, int n_machines, std::uint64_t seed);
/// `count` instances; instance k uses the k-th draw of Rng(seed) as its own seed.
std::vector<Instance> generate_dataset(InstanceKind kind, int n_jobs, int n_machines, int count, std::uint64_t seed);

struct DataConfig {
  int n_jobs = 6;
  int n_machines = 6;
  InstanceKind kind = InstanceKind::JSP;
  int validation_size = 100;
  std::uint64_t validation_seed = 2024;
  BuildMode mode = BuildMode::GapInsert;

  void validate() const;
};

struct TrainerConfig {
  double learning_rate = 1e-5;
  double grad_clip = 0.5;
  int batch_size = 64;
  int epoch_size = 2000;
  int n_epochs = 10;
  int baseline_eval_size = 1000;
  double ttest_alpha = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int log_every = 50;

  void validate() const;
};

/// Adam in double precision over a flat parameter vector (descent direction).
class Adam {
 public:
  Adam(double learning_rate, double beta1, double beta2, double epsilon, std::size_t size);

  template <typename T>
  void step(std::span<T> params, std::span<const T> grad);

  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  std::uint64_t steps = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// Scales grad in place so its L2 norm is at most max_norm. Returns the norm before clipping.
template <typename T>
double clip_global_norm(std::span<T> grad, double max_norm);

/// Greedy makespans in NormMode::Inference, evaluated in chunks.
template <typename T>
std::vector<int> greedy_makespans(const PolicyModel<T>& model, std::span<const Instance> instances, BuildMode mode,
                                  int chunk = 128);

double mean_of(std::span<const int> values);

template <typename T>
struct PolicyGradient {
  std::vector<T> grad;  // d/dtheta (1/L) sum_l (C_l - b_l) log P_l
  std::vector<int> costs;
  std::vector<double> baselines;
  std::vector<double> log_probs;
  std::vector<DispatchList> lists;
  std::vector<ad::BatchNormStats<T>> norm_stats;  // running statistics after the pass (NormMode::Train)
  double loss = 0;
};

/// Maps per-lane sampled costs to per-lane baselines.
using BaselineFn = std::function<std::vector<double>(std::span<const int> costs)>;

/// Samples `samples` lists per instance with the gradient tape recording and
/// returns the REINFORCE gradient over all lanes.
template <typename T>
PolicyGradient<T> sample_policy_gradient(const PolicyModel<T>& model, std::span<const Instance> batch, int samples,
                                         const BaselineFn& baseline, BuildMode mode, Rng& rng,
                                         ad::NormMode norm = ad::NormMode::Train);

template <typename T>
struct BaselineState {
  PolicyModel<T> model;
  std::vector<Instance> eval_set;
  std::uint64_t eval_generation = 0;
};

template <typename T>
BaselineState<T> make_baseline(const PolicyModel<T>& model, const TrainerConfig& config, const DataConfig& data,
                               std::uint64_t generation = 0);

struct BatchLog {
  int epoch = 0;
  int batch = 0;
  double mean_cost = 0;  // mean over batches since the previous log row
  double grad_norm = 0;
  bool baseline_replaced = false;
};

struct EpochMetrics {
  double mean_cost = 0;
  int batches = 0;
  std::vector<BatchLog> logs;
};

/// One pass over `dataset`. Throws std::runtime_error on a non-finite loss or gradient.
template <typename T>
EpochMetrics reinforce_epoch(PolicyModel<T>& model, const BaselineState<T>& baseline, Adam& adam,
                             const TrainerConfig& config, std::span<const Instance> dataset, BuildMode mode, Rng& rng,
                             int epoch = 0);

/// Greedy-evaluates model and baseline on the eval set; on replacement copies the
/// model into the baseline and resamples the eval set.
template <typename T>
TTestResult ttest_update(const PolicyModel<T>& model, BaselineState<T>& baseline, const TrainerConfig& config,
                         const DataConfig& data);

struct TrainOptions {
  std::optional<std::vector<Instance>> dataset;  // fixed training set; otherwise generated per epoch
  std::string out_dir;                           // checkpoints, train_log.csv, metrics.txt; empty = none
  std::optional<TrainingState> resume;
  std::uint64_t config_hash = 0;
  std::function<void(const std::string&)> progress;
};

struct TrainResult {
  std::vector<double> validation_means;  // [0] before training, then one per epoch run
  std::vector<BatchLog> log;
  std::vector<bool> baseline_replaced;  // per epoch run
  int epochs_done = 0;
  TrainingState state;
};

template <typename T>
TrainResult train(PolicyModel<T>& model, const TrainerConfig& config, const DataConfig& data,
                  const TrainOptions& options = {});

struct SearchResult {
  DispatchList best_list;
  int best_makespan = 0;
  std::vector<int> history;  // best-so-far: [0] initial greedy, then one entry per step
};

struct ActiveSearchConfig {
  int steps = 200;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double grad_clip = 0.5;
  double ema_decay = 0.99;
  std::uint64_t seed = 0;
  BuildMode mode = BuildMode::GapInsert;
};

/// Per-instance fine-tuning of a copy of `model` with an exponential moving
/// average cost baseline. Batch-norm runs on batch statistics without updating
/// the running ones.
template <typename T>
SearchResult active_search(const PolicyModel<T>& model, const Instance& inst, const ActiveSearchConfig& config);

struct EasConfig {
  int steps = 20;
  int samples = 8;  // per instance per step
  double learning_rate = 0.03;
  std::uint64_t seed = 0;
  BuildMode mode = BuildMode::GapInsert;
  int chunk = 25;  // instances optimized together
};

/// Optimizes per-instance copies of the encoder output with every model weight
/// frozen. Baseline = per-instance mean of the step's samples.
template <typename T>
std::vector<SearchResult> eas_emb(const PolicyModel<T>& model, std::span<const Instance> instances,
                                  const EasConfig& config);

/// Same budget as eas_emb without any update: best of steps * samples draws.
template <typename T>
std::vector<SearchResult> sampling_search(const PolicyModel<T>& model, std::span<const Instance> instances,
                                          const EasConfig& config);

}  // namespace seqjsp
