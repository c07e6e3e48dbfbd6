#pragma once

#include "paragen/sentence_net.hpp"

namespace paragen {

struct LatentPosterior {
  Var mu;       // R^H
  Var log_var;  // ln sigma^2, R^H
};

// Teacher-forced run of the generation stack on (features, paragraph); the
// last WordRNN hidden state feeds the 2H-output encoder head.
LatentPosterior encode(Model& m, const std::vector<double>& features,
                       const std::vector<std::vector<int>>& sentences,
                       std::optional<int> star = std::nullopt);

LatentPosterior posterior_from_hidden(Model& m, const Var& final_hidden);

// z = mu + exp(log_var / 2) o eps
Var reparameterize(const LatentPosterior& p, const std::vector<double>& eps);

// KL(q || N(0, I)) = 1/2 sum(mu^2 + sigma^2 - ln sigma^2 - 1)
Var kl_to_standard_normal(const LatentPosterior& p);

// Latent -> I-dim projection -> one priming SentenceRNN step from a zero
// hidden state; the resulting hidden state seeds the topic recurrence.
Var prime_hidden_from_latent(Model& m, const Var& z);

Paragraph decode_with_latent(Model& m, const std::vector<double>& z,
                             const std::vector<double>& features, const GenConfig& cfg,
                             Rng* rng = nullptr);

}  // namespace paragen
