#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "paragen/model.hpp"

namespace paragen {

using ad::Var;

struct TopicBundle {
  std::vector<Var> topics;          // T_i in R^H
  std::vector<Var> continue_probs;  // u_i = P(CONTINUE), scalars
  Var global_topic;                 // G in R^H
  std::vector<Var> alphas;          // norm weights, sum to 1
  bool alphas_uniform = false;      // set when every topic was the zero vector
};

// G = sum_i alpha_i T_i with alpha_i = ||T_i|| / sum_j ||T_j||. All-zero
// topics degenerate to G = 0 with uniform weights (flagged).
std::pair<Var, std::vector<Var>> global_topic(const std::vector<Var>& topics,
                                              bool* alphas_uniform = nullptr);

// Generation: steps the SentenceRNN on v, emits (T_i, u_i) per step, stops
// after the first step with u_i <= 0.5 or at s_max. `init_hidden` overrides
// the zero (or star-embedding) initial state; the VAE decoder uses it.
TopicBundle run_topic_net(Model& m, const Var& v, std::size_t s_max,
                          std::optional<int> star = std::nullopt,
                          const Var* init_hidden = nullptr);

// Training: runs exactly `sentence_count` steps (teacher-forced length).
TopicBundle run_topic_net_forced(Model& m, const Var& v, std::size_t sentence_count,
                                 std::optional<int> star = std::nullopt,
                                 const Var* init_hidden = nullptr);

}  // namespace paragen
