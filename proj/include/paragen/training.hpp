#pragma once

#include <functional>

#include "paragen/corpus.hpp"
#include "paragen/vae.hpp"

namespace paragen {

struct LossWeights {
  double lambda_s = 5.0;
  double lambda_w = 1.0;
};

struct LossBreakdown {
  Var total;
  Var stop;                      // sum of BCE(u_i, continue-target)
  Var word;                      // sum of CE(p_ij, y_ij) incl. EOS targets
  std::size_t word_targets = 0;  // number of word-level terms
};

// Eq-style joint loss over teacher-forced outputs. The continue target for
// u_i is 1 for i < S and 0 for i = S (u_i is P(CONTINUE)).
LossBreakdown paragraph_loss(const std::vector<Var>& continue_probs,
                             const std::vector<std::vector<Var>>& word_dists,
                             const std::vector<std::vector<int>>& sentences,
                             const LossWeights& w);

struct ExampleLoss {
  Var total;
  double stop_loss = 0.0;
  double word_loss = 0.0;
  double kl = 0.0;
  std::size_t word_targets = 0;
};

// Full per-example objective. In VAE mode `eps` must hold H standard-normal
// draws; the loss is reconstruction (through the latent-primed decoder) plus
// kl_weight * KL of the posterior.
ExampleLoss example_loss(Model& m, const corpus::ParagraphSample& sample,
                         const LossWeights& w, double kl_weight = 1.0,
                         const std::vector<double>* eps = nullptr);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments;  // m, v
};

// Standard bias-corrected update from the gradients currently stored on the
// parameters. A NaN gradient aborts, naming the parameter.
void adam_step(nn::ParamStore& store, AdamState& state, double lr);

// Global L2 clipping; returns the pre-clip norm.
double clip_gradients(nn::ParamStore& store, double max_norm);

// Default schedule: base for epochs 1..5, halved every 5 epochs after that.
double lr_schedule(int epoch, double base);
double lr_schedule_every(int epoch, double base, int halve_every);

struct TrainConfig {
  double base_lr = 1e-4;
  int epochs = 10;
  std::uint64_t seed = 0;
  int lr_halve_every = 5;  // 0 keeps the rate constant
  double clip_norm = 5.0;  // <= 0 disables clipping
  double kl_weight = 1.0;
  int kl_anneal_epochs = 0;  // linear 0 -> kl_weight over the first k epochs
  LossWeights weights;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double stop_loss = 0.0;  // mean per example
  double word_loss = 0.0;  // mean per example
  double kl = 0.0;         // mean per example
  double per_token_ce = 0.0;
};

using EpochCallback =
    std::function<void(const EpochStats&, Model&, const AdamState&, const Rng&)>;

// Batch-size-1 training, deterministic given the seed. Resuming: pass the
// checkpointed optimizer state, rng and epoch; the run is then bit-identical
// to one that never stopped.
std::vector<EpochStats> train(Model& m, const std::vector<corpus::ParagraphSample>& data,
                              const TrainConfig& cfg, AdamState* state = nullptr,
                              Rng* resume_rng = nullptr, int start_epoch = 0,
                              const EpochCallback& on_epoch = {});

// Held-out teacher-forced evaluation: mean word cross-entropy per token.
double mean_word_ce(Model& m, const std::vector<corpus::ParagraphSample>& data);

}  // namespace paragen
