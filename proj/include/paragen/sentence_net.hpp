#pragma once

#include <optional>
#include <vector>

#include "paragen/topic_net.hpp"

namespace paragen {

// A paragraph is a list of sentences, each a list of token ids (EOS not
// included; it only terminates decoding).
using Paragraph = std::vector<std::vector<int>>;

enum class DecodeMode { greedy, sample };

struct GenConfig {
  DecodeMode mode = DecodeMode::greedy;
  std::optional<int> star;
};

struct SentenceResult {
  std::vector<int> tokens;  // emitted words, EOS excluded
  Var h_final;              // top-layer WordRNN hidden at the terminating step
  std::vector<Var> dists;   // p_{i,j}, one per decoding step (incl. the EOS step)
};

// Closed-form coupling: (alpha*T + beta*C) / (alpha + beta), the minimizer of
// alpha*||T - x||^2 + beta*||C - x||^2.
Var couple(const Var& topic, const Var& coherence, double alpha, double beta);

// 2-layer selu/identity transform of the last WordRNN hidden state; bumps the
// model's instrumentation counter.
Var coherence_transform(Model& m, const Var& h_last);

// One GRU step with input T^C and hidden state G.
Var gate_with_global(Model& m, const Var& t_coupled, const Var& g);

// Free-running WordRNN decode from zero hidden states. Greedy picks the
// argmax (ties to the lowest token id); sample draws from p at temperature 1.
SentenceResult generate_sentence(Model& m, const Var& t_prime, std::size_t max_words,
                                 DecodeMode mode, Rng* rng = nullptr);

// Teacher-forced pass over one ground-truth sentence; emits a distribution
// for every target word plus the terminating EOS.
SentenceResult run_sentence_forced(Model& m, const Var& t_prime,
                                   const std::vector<int>& tokens);

// Full pipeline: topic net -> per-sentence couple/gate/decode with the
// coherence chain (C_0 = 0). Honors the no_coherence / no_global ablations.
Paragraph generate_paragraph(Model& m, const std::vector<double>& features,
                             const GenConfig& cfg, Rng* rng = nullptr,
                             const Var* prime_hidden = nullptr);

// Teacher-forced counterpart used by training and the VAE encoder: exactly
// one topic step per ground-truth sentence, word distributions for every
// target (including the terminating EOS of each sentence).
struct ForcedForward {
  TopicBundle bundle;
  std::vector<std::vector<Var>> word_dists;  // [sentence][step]
  Var final_hidden;                          // E, last sentence's h_final
};

ForcedForward teacher_forced_forward(Model& m, const std::vector<double>& features,
                                     const std::vector<std::vector<int>>& sentences,
                                     std::optional<int> star = std::nullopt,
                                     const Var* prime_hidden = nullptr);

}  // namespace paragen
