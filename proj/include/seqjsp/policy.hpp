#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqjsp/autograd.hpp"
#include "seqjsp/instance.hpp"
#include "seqjsp/masking.hpp"
#include "seqjsp/rng.hpp"
#include "seqjsp/schedule.hpp"

namespace seqjsp {

enum class Precision { F32, F64 };

Precision parse_precision(std::string_view s);
std::string_view to_string(Precision p);

struct ModelConfig {
  int d_h = 128;
  int n_heads = 8;
  int n_layers = 3;
  int ff_width = 512;
  std::optional<double> score_clip;  // u -> clip * tanh(u) before masking
  Precision precision = Precision::F32;

  /// Throws ValidationError listing every broken constraint.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Attention encoder + GRU pointer decoder.
///
/// Every trainable tensor is a row-major matrix in parameters(); their order is
/// fixed by the config, so the flat parameter vector has a stable layout.
template <typename T>
class PolicyModel {
 public:
  using Matrix = ad::Matrix<T>;

  struct NormSlot {
    int gamma;
    int beta;
    int stats;
  };
  struct LayerSlots {
    int wq, wk, wv, wo;
    NormSlot norm1;
    int ff1_w, ff1_b, ff2_w, ff2_b;
    NormSlot norm2;
  };
  struct Slots {
    NormSlot norm_ij, norm_mp, norm_sum;
    int w_ij, b_ij, w_mp, b_mp, w_post, b_post;
    std::vector<LayerSlots> layers;
    int w_init, b_init, start;
    int gru_wx[3], gru_bx[3], gru_wh[3], gru_bh[3];  // reset, update, candidate
    int ptr_keys, ptr_query, ptr_v;
  };

  /// Weights ~ U[-1/sqrt(d_h), 1/sqrt(d_h)], norm gamma = 1, beta = 0.
  PolicyModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const Slots& slots() const noexcept { return slots_; }

  std::vector<Matrix>& parameters() noexcept { return params_; }
  const std::vector<Matrix>& parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept { return names_; }
  std::vector<ad::BatchNormStats<T>>& norm_stats() noexcept { return stats_; }
  const std::vector<ad::BatchNormStats<T>>& norm_stats() const noexcept { return stats_; }

  std::size_t parameter_count() const;
  std::vector<T> flat_parameters() const;
  void set_flat_parameters(std::span<const T> flat);
  std::vector<T> flat_norm_stats() const;
  void set_flat_norm_stats(std::span<const T> flat);

  /// Zeroes the pointer vector v: every selectable row then scores 0.
  void zero_pointer();

  /// Same config, same parameter values and same running statistics.
  friend bool operator==(const PolicyModel& a, const PolicyModel& b) {
    return a.config_ == b.config_ && a.flat_parameters() == b.flat_parameters() &&
           a.flat_norm_stats() == b.flat_norm_stats();
  }

 private:
  int add_param(std::string name, int rows, int cols);
  NormSlot add_norm(const std::string& name, int width);

  ModelConfig config_;
  Slots slots_{};
  std::vector<Matrix> params_;
  std::vector<std::string> names_;
  std::vector<ad::BatchNormStats<T>> stats_;
};

enum class DecodeMode { Sample, Greedy, Forced };

/// Encoder output: H is (instances * rows) x d_h, mean is instances x d_h.
struct Encoded {
  ad::Var H;
  ad::Var mean;
  int instances = 0;
  int rows = 0;
};

struct DecodeOutput {
  std::vector<DispatchList> lists;  // one per lane
  ad::Var log_prob;                  // lanes x 1
  std::vector<double> log_probs;
};

/// One forward pass of a model recorded on a tape.
///
/// Parameters are bound as tape leaves on construction; param_vars() maps them
/// back to model slots for gradient extraction.
template <typename T>
class PolicyForward {
 public:
  /// `stats_update` receives running batch-norm statistics in NormMode::Train.
  PolicyForward(const PolicyModel<T>& model, ad::Tape<T>& tape, ad::NormMode mode,
                std::vector<ad::BatchNormStats<T>>* stats_update = nullptr, bool params_require_grad = true);

  ad::Tape<T>& tape() noexcept { return tape_; }
  const std::vector<ad::Var>& param_vars() const noexcept { return params_; }

  /// X = Linear(BN(BN(i,j) W_ij + BN(M,p) W_Mp)), shape (N*rows) x d_h.
  ad::Var embed(std::span<const SeqEncoding> batch);

  /// n_layers attention blocks over X; mean pooled per instance.
  Encoded encode(ad::Var X, int instances, int rows);

  Encoded embed_and_encode(std::span<const Instance> batch);

  struct DecoderState {
    ad::Var hidden;  // lanes x d_h
    ad::Var input;   // lanes x d_h
  };

  /// hidden = affine(mean[instance of lane]), input = learned start vector.
  DecoderState init_decoder(const Encoded& enc, std::span<const int> lane_instance);

  /// Pointer keys H W1, computed once per decode.
  ad::Var pointer_keys(const Encoded& enc);

  /// Advances the GRU and returns masked log-probabilities (lanes x rows, -inf on
  /// non-selectable rows). The caller picks rows and calls feed().
  ad::Var decode_step(DecoderState& state, ad::Var keys, const Encoded& enc, std::span<const int> lane_instance,
                      const MaskState& masks);

  /// Next decoder input = encoder embedding of the rows just selected.
  void feed(DecoderState& state, const Encoded& enc, std::span<const int> lane_instance, std::span<const int> rows);

  /// Full n*m-step decode. lane_instance maps lanes to encoded instances.
  /// Sample draws with `rng`; Greedy takes argmax (ties to lowest row);
  /// Forced follows `forced` (one list per lane) and throws ValidationError on
  /// an infeasible list.
  DecodeOutput decode(const Encoded& enc, std::span<const int> lane_instance, int n_jobs, int n_machines,
                      DecodeMode mode, Rng* rng = nullptr, std::span<const DispatchList> forced = {},
                      ProblemMode problem = ProblemMode::JSP);

  /// Gradient of the last backward() w.r.t. every model parameter, flattened.
  std::vector<T> flat_grad() const;

 private:
  ad::Var p(int slot) const { return params_[static_cast<std::size_t>(slot)]; }
  ad::Var norm(ad::Var x, const typename PolicyModel<T>::NormSlot& slot);

  const PolicyModel<T>& model_;
  ad::Tape<T>& tape_;
  ad::NormMode mode_;
  std::vector<ad::BatchNormStats<T>>* stats_update_;
  std::vector<ad::Var> params_;
};

struct Rollout {
  DispatchList list;
  double log_prob = 0;  // sum_t log pi(o'_t | ...)
  int makespan = 0;
  DecodeMode mode = DecodeMode::Greedy;
};

/// Decodes every instance `samples` times (lanes grouped per instance) without
/// recording gradients. Sample mode requires `rng`.
template <typename T>
std::vector<Rollout> rollout(const PolicyModel<T>& model, std::span<const Instance> batch, DecodeMode mode,
                             Rng* rng = nullptr, BuildMode build = BuildMode::GapInsert, int samples = 1,
                             ad::NormMode norm = ad::NormMode::Inference);

template <typename T>
struct LogProbGrad {
  std::vector<double> log_probs;
  std::vector<T> grad;  // d/dtheta sum_k weights[k] * log P_k
};

/// Teacher-forced re-run along `lists`. Throws ValidationError if a list is infeasible.
template <typename T>
LogProbGrad<T> log_prob_and_grad(const PolicyModel<T>& model, std::span<const Instance> batch,
                                 std::span<const DispatchList> lists, std::span<const double> weights,
                                 ad::NormMode norm = ad::NormMode::Inference);

/// Throws ValidationError if instances differ in shape.
void require_same_shape(std::span<const Instance> batch);

std::vector<SeqEncoding> encode_batch(std::span<const Instance> batch);

}  // namespace seqjsp
