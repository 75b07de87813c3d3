#include "seqjsp/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace seqjsp {

namespace {

// Stream keys for Rng::derive.
constexpr std::uint64_t kTrainData = 1;
constexpr std::uint64_t kSampling = 2;
constexpr std::uint64_t kEvalSet = 3;
constexpr std::uint64_t kShuffle = 4;
constexpr std::uint64_t kInit = 5;

template <typename T>
bool all_finite(std::span<const T> v) {
  for (T x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

template <typename T>
void adam_update(PolicyModel<T>& model, Adam& adam, std::span<const T> grad) {
  auto params = model.flat_parameters();
  adam.step<T>(params, grad);
  model.set_flat_parameters(params);
}

std::vector<double> to_double(std::span<const int> v) { return {v.begin(), v.end()}; }

template <typename T>
std::vector<double> widen(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

template <typename T>
std::vector<T> narrow(const std::vector<double>& v) {
  std::vector<T> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<T>(v[k]);
  return out;
}

void keep_best(SearchResult& r, const DispatchList& list, int cost) {
  if (cost < r.best_makespan) {
    r.best_makespan = cost;
    r.best_list = list;
  }
}

}  // namespace

InstanceKind parse_instance_kind(std::string_view s) {
  if (s == "jsp") return InstanceKind::JSP;
  if (s == "fsp") return InstanceKind::FSP;
  throw ValidationError("unknown instance kind '" + std::string(s) + "' (expected jsp or fsp)");
}

std::string_view to_string(InstanceKind kind) { return kind == InstanceKind::JSP ? "jsp" : "fsp"; }

std::uint64_t model_init_seed(std::uint64_t seed) { return Rng::derive(seed, {kInit}).next(); }

Instance generate_instance(InstanceKind kind, int n_jobs, int n_machines, std::uint64_t seed) {
  return kind == InstanceKind::JSP ? generate_taillard(n_jobs, n_machines, seed)
                                   : generate_flowshop(n_jobs, n_machines, seed);
}

std::vector<Instance> generate_dataset(InstanceKind kind, int n_jobs, int n_machines, int count, std::uint64_t seed) {
  if (count < 0) throw ValidationError("instance count must be >= 0");
  Rng rng(seed);
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(generate_instance(kind, n_jobs, n_machines, rng.next()));
  return out;
}

void DataConfig::validate() const {
  std::vector<std::string> errors;
  if (n_jobs < 1) errors.push_back("n_jobs must be >= 1");
  if (n_machines < 1) errors.push_back("n_machines must be >= 1");
  if (validation_size < 1) errors.push_back("validation_size must be >= 1");
  if (errors.empty()) return;
  std::string msg = "invalid data config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

void TrainerConfig::validate() const {
  std::vector<std::string> errors;
  if (!(learning_rate > 0)) errors.push_back("learning_rate must be > 0");
  if (!(grad_clip > 0)) errors.push_back("grad_clip must be > 0");
  if (batch_size < 1) errors.push_back("batch_size must be >= 1");
  if (epoch_size < 1) errors.push_back("epoch_size must be >= 1");
  if (n_epochs < 0) errors.push_back("n_epochs must be >= 0");
  if (baseline_eval_size < 2) errors.push_back("baseline_eval_size must be >= 2");
  if (!(ttest_alpha > 0 && ttest_alpha < 1)) errors.push_back("ttest_alpha must lie in (0, 1)");
  if (!(beta1 >= 0 && beta1 < 1)) errors.push_back("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) errors.push_back("beta2 must lie in [0, 1)");
  if (!(epsilon > 0)) errors.push_back("epsilon must be > 0");
  if (log_every < 1) errors.push_back("log_every must be >= 1");
  if (errors.empty()) return;
  std::string msg = "invalid trainer config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------

Adam::Adam(double lr, double b1, double b2, double eps, std::size_t size)
    : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps), m(size, 0.0), v(size, 0.0) {}

template <typename T>
void Adam::step(std::span<T> params, std::span<const T> grad) {
  if (params.size() != m.size() || grad.size() != m.size()) throw std::logic_error("Adam: size mismatch");
  ++steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double g = static_cast<double>(grad[k]);
    m[k] = beta1 * m[k] + (1.0 - beta1) * g;
    v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
    const double update = learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon);
    params[k] = static_cast<T>(static_cast<double>(params[k]) - update);
  }
}

template <typename T>
double clip_global_norm(std::span<T> grad, double max_norm) {
  double ss = 0;
  for (T g : grad) ss += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(ss);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grad) g = static_cast<T>(static_cast<double>(g) * scale);
  }
  return norm;
}

double mean_of(std::span<const int> values) {
  if (values.empty()) return 0;
  double s = 0;
  for (int v : values) s += v;
  return s / static_cast<double>(values.size());
}

template <typename T>
std::vector<int> greedy_makespans(const PolicyModel<T>& model, std::span<const Instance> instances, BuildMode mode,
                                  int chunk) {
  std::vector<int> out;
  out.reserve(instances.size());
  for (std::size_t lo = 0; lo < instances.size(); lo += static_cast<std::size_t>(chunk)) {
    const auto len = std::min(static_cast<std::size_t>(chunk), instances.size() - lo);
    for (const auto& r : rollout(model, instances.subspan(lo, len), DecodeMode::Greedy, nullptr, mode))
      out.push_back(r.makespan);
  }
  return out;
}

template <typename T>
PolicyGradient<T> sample_policy_gradient(const PolicyModel<T>& model, std::span<const Instance> batch, int samples,
                                         const BaselineFn& baseline, BuildMode mode, Rng& rng, ad::NormMode norm) {
  require_same_shape(batch);
  if (samples < 1) throw ValidationError("samples must be >= 1");
  PolicyGradient<T> out;
  out.norm_stats = model.norm_stats();
  ad::Tape<T> tape(true);
  PolicyForward<T> fwd(model, tape, norm, norm == ad::NormMode::Train ? &out.norm_stats : nullptr, true);
  auto enc = fwd.embed_and_encode(batch);
  std::vector<int> lanes;
  for (int b = 0; b < static_cast<int>(batch.size()); ++b)
    for (int s = 0; s < samples; ++s) lanes.push_back(b);
  auto dec = fwd.decode(enc, lanes, batch[0].n_jobs(), batch[0].n_machines(), DecodeMode::Sample, &rng);
  const auto L = lanes.size();
  out.costs.resize(L);
  for (std::size_t l = 0; l < L; ++l)
    out.costs[l] = build_schedule(batch[static_cast<std::size_t>(lanes[l])], dec.lists[l], mode).makespan();
  out.baselines = baseline(out.costs);
  if (out.baselines.size() != L) throw std::logic_error("baseline returned the wrong number of values");
  std::vector<T> w(L);
  for (std::size_t l = 0; l < L; ++l)
    w[l] = static_cast<T>((out.costs[l] - out.baselines[l]) / static_cast<double>(L));
  auto loss = tape.weighted_sum(dec.log_prob, std::move(w));
  out.loss = static_cast<double>(tape.value(loss)(0, 0));
  tape.backward(loss);
  out.grad = fwd.flat_grad();
  out.log_probs = std::move(dec.log_probs);
  out.lists = std::move(dec.lists);
  return out;
}

template <typename T>
BaselineState<T> make_baseline(const PolicyModel<T>& model, const TrainerConfig& config, const DataConfig& data,
                               std::uint64_t generation) {
  auto seed = Rng::derive(config.seed, {kEvalSet, generation}).next();
  return {model, generate_dataset(data.kind, data.n_jobs, data.n_machines, config.baseline_eval_size, seed), generation};
}

template <typename T>
EpochMetrics reinforce_epoch(PolicyModel<T>& model, const BaselineState<T>& baseline, Adam& adam,
                             const TrainerConfig& config, std::span<const Instance> dataset, BuildMode mode, Rng& rng,
                             int epoch) {
  EpochMetrics metrics;
  double total = 0;
  double since_log = 0;
  int batches_since_log = 0;
  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (std::size_t lo = 0; lo < dataset.size(); lo += bs) {
    const auto batch = dataset.subspan(lo, std::min(bs, dataset.size() - lo));
    const auto base = to_double(greedy_makespans(baseline.model, batch, mode));
    auto pg = sample_policy_gradient<T>(
        model, batch, 1, [&](std::span<const int>) { return base; }, mode, rng, ad::NormMode::Train);
    if (!std::isfinite(pg.loss) || !all_finite<T>(pg.grad)) {
      std::ostringstream msg;
      msg << "non-finite " << (std::isfinite(pg.loss) ? "gradient" : "loss") << " at epoch " << epoch << ", batch "
          << metrics.batches << " (loss " << pg.loss << ", mean cost " << mean_of(pg.costs) << ")";
      throw std::runtime_error(msg.str());
    }
    const double gnorm = clip_global_norm<T>(pg.grad, config.grad_clip);
    adam_update<T>(model, adam, pg.grad);
    model.norm_stats() = std::move(pg.norm_stats);
    const double cost = mean_of(pg.costs);
    total += cost;
    since_log += cost;
    ++batches_since_log;
    ++metrics.batches;
    if (metrics.batches % config.log_every == 0 || lo + bs >= dataset.size()) {
      metrics.logs.push_back({epoch, metrics.batches, since_log / batches_since_log, gnorm, false});
      since_log = 0;
      batches_since_log = 0;
    }
  }
  metrics.mean_cost = metrics.batches ? total / metrics.batches : 0;
  return metrics;
}

template <typename T>
TTestResult ttest_update(const PolicyModel<T>& model, BaselineState<T>& baseline, const TrainerConfig& config,
                         const DataConfig& data) {
  const auto cand = to_double(greedy_makespans(model, baseline.eval_set, data.mode));
  const auto base = to_double(greedy_makespans(baseline.model, baseline.eval_set, data.mode));
  auto result = paired_ttest(cand, base, config.ttest_alpha);
  if (result.replace) baseline = make_baseline(model, config, data, baseline.eval_generation + 1);
  return result;
}

template <typename T>
TrainResult train(PolicyModel<T>& model, const TrainerConfig& config, const DataConfig& data,
                  const TrainOptions& options) {
  config.validate();
  data.validate();
  if (options.dataset) {
    if (options.dataset->empty()) throw ValidationError("training dataset is empty");
    for (const auto& inst : *options.dataset)
      if (inst.n_jobs() != data.n_jobs || inst.n_machines() != data.n_machines)
        throw ValidationError("training dataset shape does not match n_jobs x n_machines");
  }
  const auto n_params = model.parameter_count();
  Adam adam(config.learning_rate, config.beta1, config.beta2, config.epsilon, n_params);
  auto baseline = make_baseline(model, config, data, 0);
  TrainResult result;
  if (options.resume) {
    const auto& s = *options.resume;
    if (s.adam_m.size() != n_params || s.adam_v.size() != n_params || s.baseline_params.size() != n_params)
      throw ValidationError("resume state does not match the model size");
    adam.steps = s.adam_step;
    adam.m = s.adam_m;
    adam.v = s.adam_v;
    baseline = make_baseline(model, config, data, s.eval_generation);
    baseline.model.set_flat_parameters(narrow<T>(s.baseline_params));
    baseline.model.set_flat_norm_stats(narrow<T>(s.baseline_stats));
    result.epochs_done = s.epochs_done;
  }

  const auto validation =
      generate_dataset(data.kind, data.n_jobs, data.n_machines, data.validation_size, data.validation_seed);
  result.validation_means.push_back(mean_of(greedy_makespans(model, validation, data.mode)));

  namespace fs = std::filesystem;
  std::ofstream log_file;
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    const auto log_path = fs::path(options.out_dir) / "train_log.csv";
    const bool fresh = !options.resume || !fs::exists(log_path);
    log_file.open(log_path, fresh ? std::ios::trunc : std::ios::app);
    if (!log_file) throw std::runtime_error("cannot write " + log_path.string());
    if (fresh) log_file << "epoch,batch,mean_cost,grad_norm,baseline_replaced\n";
  }
  auto say = [&](const std::string& s) {
    if (options.progress) options.progress(s);
  };
  {
    std::ostringstream s;
    s << "epoch " << result.epochs_done << " validation greedy mean " << result.validation_means.back();
    say(s.str());
  }

  for (int epoch = result.epochs_done; epoch < config.n_epochs; ++epoch) {
    std::vector<Instance> dataset;
    if (options.dataset) {
      dataset = *options.dataset;
      auto shuffle = Rng::derive(config.seed, {kShuffle, static_cast<std::uint64_t>(epoch)});
      shuffle.shuffle(std::span<Instance>(dataset));
    } else {
      dataset = generate_dataset(data.kind, data.n_jobs, data.n_machines, config.epoch_size,
                                 Rng::derive(config.seed, {kTrainData, static_cast<std::uint64_t>(epoch)}).next());
    }
    auto rng = Rng::derive(config.seed, {kSampling, static_cast<std::uint64_t>(epoch)});
    auto metrics = reinforce_epoch(model, baseline, adam, config, dataset, data.mode, rng, epoch);
    const auto tt = ttest_update(model, baseline, config, data);
    if (!metrics.logs.empty()) metrics.logs.back().baseline_replaced = tt.replace;
    result.baseline_replaced.push_back(tt.replace);
    result.log.insert(result.log.end(), metrics.logs.begin(), metrics.logs.end());
    result.validation_means.push_back(mean_of(greedy_makespans(model, validation, data.mode)));
    result.epochs_done = epoch + 1;

    auto& st = result.state;
    st.epochs_done = result.epochs_done;
    st.adam_step = adam.steps;
    st.adam_m = adam.m;
    st.adam_v = adam.v;
    st.baseline_params = widen(baseline.model.flat_parameters());
    st.baseline_stats = widen(baseline.model.flat_norm_stats());
    st.eval_generation = baseline.eval_generation;
    st.config_hash = options.config_hash;

    if (!options.out_dir.empty()) {
      for (const auto& row : metrics.logs)
        log_file << row.epoch << ',' << row.batch << ',' << row.mean_cost << ',' << row.grad_norm << ','
                 << (row.baseline_replaced ? 1 : 0) << '\n';
      log_file.flush();
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d.ckpt", epoch + 1);
      const auto bytes = serialize_checkpoint(model, &st, TrainedShape{data.n_jobs, data.n_machines});
      write_text_file((fs::path(options.out_dir) / name).string(), bytes);
      write_text_file((fs::path(options.out_dir) / "last.ckpt").string(), bytes);
    }
    std::ostringstream s;
    s << "epoch " << epoch + 1 << " train mean " << metrics.mean_cost << " validation greedy mean "
      << result.validation_means.back() << " t-test p " << tt.p_value << (tt.replace ? " baseline replaced" : "");
    say(s.str());
  }
  if (result.state.adam_m.empty()) {
    auto& st = result.state;
    st.epochs_done = result.epochs_done;
    st.adam_step = adam.steps;
    st.adam_m = adam.m;
    st.adam_v = adam.v;
    st.baseline_params = widen(baseline.model.flat_parameters());
    st.baseline_stats = widen(baseline.model.flat_norm_stats());
    st.eval_generation = baseline.eval_generation;
    st.config_hash = options.config_hash;
  }

  if (!options.out_dir.empty()) {
    std::ofstream metrics((fs::path(options.out_dir) / "metrics.txt"));
    metrics << "config_hash = " << hex64(options.config_hash) << "\n";
    metrics << "epochs_done = " << result.epochs_done << "\n";
    metrics << "precision = " << to_string(model.config().precision) << "\n";
    metrics << "parameters = " << n_params << "\n";
    metrics << "validation_size = " << data.validation_size << "\n";
    for (std::size_t k = 0; k < result.validation_means.size(); ++k)
      metrics << "validation_mean_" << k << " = " << result.validation_means[k] << "\n";
    metrics << "checkpoint_hash = " << hex64(fnv1a(serialize_checkpoint(model, &result.state, TrainedShape{data.n_jobs, data.n_machines}))) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------

template <typename T>
SearchResult active_search(const PolicyModel<T>& model, const Instance& inst, const ActiveSearchConfig& config) {
  if (config.steps < 0 || config.batch_size < 1) throw ValidationError("active search needs steps >= 0, batch >= 1");
  PolicyModel<T> local = model;
  Adam adam(config.learning_rate, 0.9, 0.999, 1e-8, local.parameter_count());
  auto rng = Rng::derive(config.seed, {kSampling});
  std::span<const Instance> one(&inst, 1);

  SearchResult result;
  auto greedy = rollout(local, one, DecodeMode::Greedy, nullptr, config.mode, 1, ad::NormMode::TrainFrozen);
  result.best_list = greedy[0].list;
  result.best_makespan = greedy[0].makespan;
  result.history.push_back(result.best_makespan);

  std::optional<double> ema;
  for (int step = 0; step < config.steps; ++step) {
    double batch_mean = 0;
    auto pg = sample_policy_gradient<T>(
        local, one, config.batch_size,
        [&](std::span<const int> costs) {
          batch_mean = mean_of(costs);
          if (!ema) ema = batch_mean;
          return std::vector<double>(costs.size(), *ema);
        },
        config.mode, rng, ad::NormMode::TrainFrozen);
    ema = config.ema_decay * *ema + (1.0 - config.ema_decay) * batch_mean;
    for (std::size_t l = 0; l < pg.costs.size(); ++l) keep_best(result, pg.lists[l], pg.costs[l]);
    result.history.push_back(result.best_makespan);
    if (all_finite<T>(pg.grad)) {
      clip_global_norm<T>(pg.grad, config.grad_clip);
      adam_update<T>(local, adam, pg.grad);
    }
  }
  return result;
}

namespace {

template <typename T>
ad::Matrix<T> encode_inference(const PolicyModel<T>& model, std::span<const Instance> chunk) {
  ad::Tape<T> tape(false);
  PolicyForward<T> fwd(model, tape, ad::NormMode::Inference, nullptr, false);
  return tape.value(fwd.embed_and_encode(chunk).H);
}

// Greedy incumbents on a fixed embedding.
template <typename T>
std::vector<SearchResult> greedy_start(const PolicyModel<T>& model, std::span<const Instance> chunk,
                                       const ad::Matrix<T>& H, BuildMode mode) {
  ad::Tape<T> tape(false);
  PolicyForward<T> fwd(model, tape, ad::NormMode::Inference, nullptr, false);
  const int rows = chunk[0].n_ops();
  auto Hv = tape.constant(H);
  Encoded enc{Hv, tape.block_mean(Hv, rows), static_cast<int>(chunk.size()), rows};
  std::vector<int> lanes(chunk.size());
  std::iota(lanes.begin(), lanes.end(), 0);
  auto dec = fwd.decode(enc, lanes, chunk[0].n_jobs(), chunk[0].n_machines(), DecodeMode::Greedy);
  std::vector<SearchResult> out(chunk.size());
  for (std::size_t k = 0; k < chunk.size(); ++k) {
    out[k].best_list = dec.lists[k];
    out[k].best_makespan = build_schedule(chunk[k], dec.lists[k], mode).makespan();
    out[k].history.push_back(out[k].best_makespan);
  }
  return out;
}

template <typename T>
std::vector<SearchResult> search_impl(const PolicyModel<T>& model, std::span<const Instance> instances,
                                      const EasConfig& config, bool update) {
  if (config.steps < 0 || config.samples < 1 || config.chunk < 1)
    throw ValidationError("search needs steps >= 0, samples >= 1, chunk >= 1");
  std::vector<SearchResult> results;
  if (instances.empty()) return results;
  require_same_shape(instances);
  const int n = instances[0].n_jobs();
  const int m = instances[0].n_machines();
  const int rows = n * m;
  for (std::size_t lo = 0, c = 0; lo < instances.size(); lo += static_cast<std::size_t>(config.chunk), ++c) {
    const auto chunk = instances.subspan(lo, std::min(static_cast<std::size_t>(config.chunk), instances.size() - lo));
    const int N = static_cast<int>(chunk.size());
    auto H = encode_inference(model, chunk);
    auto local = greedy_start(model, chunk, H, config.mode);
    auto rng = Rng::derive(config.seed, {kSampling, c});
    Adam adam(config.learning_rate, 0.9, 0.999, 1e-8, static_cast<std::size_t>(H.size()));
    std::vector<int> lanes;
    for (int b = 0; b < N; ++b)
      for (int s = 0; s < config.samples; ++s) lanes.push_back(b);
    for (int step = 0; step < config.steps; ++step) {
      ad::Tape<T> tape(update);
      PolicyForward<T> fwd(model, tape, ad::NormMode::Inference, nullptr, false);
      auto Hv = tape.leaf(H, update);
      Encoded enc{Hv, tape.block_mean(Hv, rows), N, rows};
      auto dec = fwd.decode(enc, lanes, n, m, DecodeMode::Sample, &rng);
      std::vector<int> costs(lanes.size());
      for (std::size_t l = 0; l < lanes.size(); ++l) {
        const auto b = static_cast<std::size_t>(lanes[l]);
        costs[l] = build_schedule(chunk[b], dec.lists[l], config.mode).makespan();
        keep_best(local[b], dec.lists[l], costs[l]);
      }
      for (auto& r : local) r.history.push_back(r.best_makespan);
      if (!update) continue;
      std::vector<T> w(lanes.size());
      for (int b = 0; b < N; ++b) {
        double mean = 0;
        for (int s = 0; s < config.samples; ++s) mean += costs[static_cast<std::size_t>(b * config.samples + s)];
        mean /= config.samples;
        for (int s = 0; s < config.samples; ++s) {
          const auto l = static_cast<std::size_t>(b * config.samples + s);
          w[l] = static_cast<T>((costs[l] - mean) / config.samples);
        }
      }
      auto loss = tape.weighted_sum(dec.log_prob, std::move(w));
      tape.backward(loss);
      const auto g = tape.grad(Hv);
      if (!g.allFinite()) continue;
      adam.step<T>(std::span<T>(H.data(), static_cast<std::size_t>(H.size())),
                   std::span<const T>(g.data(), static_cast<std::size_t>(g.size())));
    }
    for (auto& r : local) results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

template <typename T>
std::vector<SearchResult> eas_emb(const PolicyModel<T>& model, std::span<const Instance> instances,
                                  const EasConfig& config) {
  return search_impl(model, instances, config, true);
}

template <typename T>
std::vector<SearchResult> sampling_search(const PolicyModel<T>& model, std::span<const Instance> instances,
                                          const EasConfig& config) {
  return search_impl(model, instances, config, false);
}

#define SEQJSP_INSTANTIATE(T)                                                                                     \
  template void Adam::step<T>(std::span<T>, std::span<const T>);                                                  \
  template double clip_global_norm<T>(std::span<T>, double);                                                      \
  template std::vector<int> greedy_makespans(const PolicyModel<T>&, std::span<const Instance>, BuildMode, int);   \
  template PolicyGradient<T> sample_policy_gradient(const PolicyModel<T>&, std::span<const Instance>, int,        \
                                                    const BaselineFn&, BuildMode, Rng&, ad::NormMode);            \
  template BaselineState<T> make_baseline(const PolicyModel<T>&, const TrainerConfig&, const DataConfig&,         \
                                          std::uint64_t);                                                         \
  template EpochMetrics reinforce_epoch(PolicyModel<T>&, const BaselineState<T>&, Adam&, const TrainerConfig&,    \
                                        std::span<const Instance>, BuildMode, Rng&, int);                         \
  template TTestResult ttest_update(const PolicyModel<T>&, BaselineState<T>&, const TrainerConfig&,               \
                                    const DataConfig&);                                                           \
  template TrainResult train(PolicyModel<T>&, const TrainerConfig&, const DataConfig&, const TrainOptions&);      \
  template SearchResult active_search(const PolicyModel<T>&, const Instance&, const ActiveSearchConfig&);         \
  template std::vector<SearchResult> eas_emb(const PolicyModel<T>&, std::span<const Instance>, const EasConfig&); \
  template std::vector<SearchResult> sampling_search(const PolicyModel<T>&, std::span<const Instance>,            \
                                                     const EasConfig&);

SEQJSP_INSTANTIATE(float)
SEQJSP_INSTANTIATE(double)

#undef SEQJSP_INSTANTIATE

}  // namespace seqjsp
