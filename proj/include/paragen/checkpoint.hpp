#pragma once

#include <filesystem>

#include "paragen/training.hpp"

namespace paragen {

// Versioned snapshot of model + optimizer + training RNG; save/load round
// trips are bit-exact so a resumed run matches an uninterrupted one.
struct Checkpoint {
  std::uint32_t version = 1;
  Hyper hp;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string rng_state;
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> tensors;
  bool has_optimizer = false;
  std::int64_t adam_t = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> adam_moments;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint snapshot(const Model& m, const AdamState* adam, int epoch, std::uint64_t seed,
                    const Rng* rng);

// Rebuilds the model from the checkpoint's hyperparameters and restores all
// state; shapes are validated against the freshly built model.
Model restore_model(const Checkpoint& c);
void restore_optimizer(const Checkpoint& c, AdamState& adam, Rng& rng);

}  // namespace paragen
