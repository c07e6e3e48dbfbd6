#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "paragen/nn.hpp"

namespace paragen {

// Reserved token ids, fixed across every vocabulary file.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;

struct Hyper {
  std::size_t feat_dim = 64;   // I, pooled feature width
  std::size_t hidden = 64;     // H
  std::size_t vocab = 0;       // V, includes PAD/BOS/EOS
  std::size_t max_sentences = 6;
  std::size_t max_words = 30;
  double couple_alpha = 1.0;
  double couple_beta = 1.5;
  double lambda_s = 5.0;
  double lambda_w = 1.0;
  bool no_coherence = false;  // ablation: force C = 0
  bool no_global = false;     // ablation: force G = 0
  bool use_stars = false;     // star-rating conditioning of the first step
  bool vae = false;           // encoder head + latent injection

  bool operator==(const Hyper&) const = default;
};

// All trainable parameters of the generator stack, grouped by role.
struct Model {
  Hyper hp;
  nn::ParamStore store;

  // topic generation net
  nn::Gru sent_rnn;        // input I, hidden H
  nn::Dense stop_head;     // H -> 1, sigmoid, P(CONTINUE)
  nn::Dense topic_fc1;     // H -> H, selu
  nn::Dense topic_fc2;     // H -> H, identity
  nn::Embedding star_emb;  // 5 x H, only when use_stars

  // sentence generation net
  nn::Dense coh_fc1;        // H -> H, selu
  nn::Dense coh_fc2;        // H -> H, identity
  nn::Gru gate;             // input H, hidden H; couples T^C with G
  nn::Gru word1;            // input 2H (embedding || T'), hidden H
  nn::Gru word2;            // input H, hidden H
  nn::Dense out_head;       // H -> V, softmax
  nn::Embedding word_emb;   // V x H

  // variational wrapper, only when vae
  nn::Dense enc_head;  // H -> 2H, identity; mu then log-variance
  nn::Dense inject;    // H -> I, identity; latent -> priming input

  // instrumentation: number of coherence-transform evaluations since reset
  std::size_t coherence_transform_count = 0;

  static Model init(const Hyper& hp, std::uint64_t seed);
};

}  // namespace paragen
