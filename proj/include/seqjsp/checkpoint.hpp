#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seqjsp/policy.hpp"

namespace seqjsp {

/// Optimizer and baseline state carried between epochs so training can resume.
struct TrainingState {
  int epochs_done = 0;
  std::uint64_t adam_step = 0;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::vector<double> baseline_params;
  std::vector<double> baseline_stats;
  std::uint64_t eval_generation = 0;  // how many times the baseline eval set was resampled
  std::uint64_t config_hash = 0;

  friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

using AnyModel = std::variant<PolicyModel<float>, PolicyModel<double>>;

/// Instance shape a model was trained on.
struct TrainedShape {
  int n_jobs = 0;
  int n_machines = 0;

  friend bool operator==(const TrainedShape&, const TrainedShape&) = default;
};

struct LoadedCheckpoint {
  AnyModel model;
  std::optional<TrainingState> training;
  std::optional<TrainedShape> shape;

  const ModelConfig& config() const;
};

/// Layout (all integers and floats little-endian):
///   "SEQJSPCK" | u32 version=1 | u8 precision (4 or 8)
///   i32 d_h, n_heads, n_layers, ff_width | u8 has_clip | f64 clip
///   u8 has_shape | i32 n_jobs | i32 n_machines
///   u64 count | count params (precision width)
///   u64 count | count norm statistics (mean then var per norm, precision width)
///   u8 has_training | [i32 epochs_done | u64 adam_step | u64 eval_generation | u64 config_hash |
///                      4 x (u64 count | count f64): adam_m, adam_v, baseline_params, baseline_stats]
template <typename T>
std::string serialize_checkpoint(const PolicyModel<T>& model, const TrainingState* training = nullptr,
                                 std::optional<TrainedShape> shape = std::nullopt);

LoadedCheckpoint deserialize_checkpoint(std::string_view bytes);

template <typename T>
void save_checkpoint(const std::string& path, const PolicyModel<T>& model, const TrainingState* training = nullptr,
                     std::optional<TrainedShape> shape = std::nullopt);

LoadedCheckpoint load_checkpoint(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

}  // namespace seqjsp
