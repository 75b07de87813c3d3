#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "seqjsp/policy.hpp"
#include "seqjsp/trainer.hpp"

namespace seqjsp {

struct RunConfig {
  ModelConfig model;
  TrainerConfig trainer;
  DataConfig data;
};

/// INI text with sections [model], [trainer], [data]. Unknown sections or keys,
/// malformed values, missing required keys and range violations are all
/// collected into one ValidationError.
///
/// Required: trainer.learning_rate, trainer.grad_clip, trainer.batch_size,
/// trainer.epoch_size, trainer.n_epochs, trainer.seed, data.n_jobs, data.n_machines.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Every field as `section.key = value`, one per line, in fixed order.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

}  // namespace seqjsp
