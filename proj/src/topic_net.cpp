#include "paragen/topic_net.hpp"

namespace paragen {

namespace {

Var initial_hidden(Model& m, std::optional<int> star, const Var* init_hidden) {
  if (init_hidden) return *init_hidden;
  if (star) {
    if (!m.hp.use_stars) throw ContractViolation("star given but model has no star embedding");
    if (*star < 1 || *star > 5) throw ContractViolation("star rating must be in 1..5");
    return nn::lookup(m.star_emb, static_cast<std::size_t>(*star - 1));
  }
  return ad::zeros({m.hp.hidden});
}

struct TopicStep {
  Var topic;
  Var cont;
};

TopicStep step(Model& m, const Var& v, Var& h) {
  h = nn::gru_cell(v, h, m.sent_rnn);
  TopicStep s;
  s.cont = nn::apply(m.stop_head, h);  // length-1 vector, treated as scalar
  s.topic = nn::apply(m.topic_fc2, nn::apply(m.topic_fc1, h));
  return s;
}

}  // namespace

std::pair<Var, std::vector<Var>> global_topic(const std::vector<Var>& topics,
                                              bool* alphas_uniform) {
  if (topics.empty()) throw ContractViolation("global_topic: empty topic list");
  const std::size_t h = topics[0]->size();

  bool all_zero = true;
  for (const auto& t : topics) {
    for (double x : t->value) {
      if (x != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (!all_zero) break;
  }
  if (alphas_uniform) *alphas_uniform = all_zero;
  if (all_zero) {
    // weights undefined; uniform by convention, G = 0
    std::vector<Var> alphas;
    const double u = 1.0 / static_cast<double>(topics.size());
    for (std::size_t i = 0; i < topics.size(); ++i) alphas.push_back(ad::scalar(u));
    return {ad::zeros({h}), std::move(alphas)};
  }

  std::vector<Var> norms;
  norms.reserve(topics.size());
  Var total = ad::norm2(topics[0]);
  norms.push_back(total);
  for (std::size_t i = 1; i < topics.size(); ++i) {
    norms.push_back(ad::norm2(topics[i]));
    total = ad::add(total, norms.back());
  }
  std::vector<Var> alphas;
  alphas.reserve(topics.size());
  Var g;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    alphas.push_back(ad::sdiv(norms[i], total));
    auto term = ad::smul(alphas.back(), topics[i]);
    g = g ? ad::add(g, term) : term;
  }
  return {g, std::move(alphas)};
}

TopicBundle run_topic_net(Model& m, const Var& v, std::size_t s_max,
                          std::optional<int> star, const Var* init_hidden) {
  if (v->size() != m.hp.feat_dim) throw ContractViolation("run_topic_net: wrong feature length");
  if (s_max < 1) throw ContractViolation("run_topic_net: s_max must be >= 1");
  TopicBundle b;
  Var h = initial_hidden(m, star, init_hidden);
  for (std::size_t i = 0; i < s_max; ++i) {
    auto s = step(m, v, h);
    b.topics.push_back(s.topic);
    b.continue_probs.push_back(s.cont);
    if (s.cont->value[0] <= 0.5) break;  // CONTINUE iff u_i > 0.5
  }
  auto [g, alphas] = global_topic(b.topics, &b.alphas_uniform);
  b.global_topic = std::move(g);
  b.alphas = std::move(alphas);
  return b;
}

TopicBundle run_topic_net_forced(Model& m, const Var& v, std::size_t sentence_count,
                                 std::optional<int> star, const Var* init_hidden) {
  if (v->size() != m.hp.feat_dim) throw ContractViolation("run_topic_net: wrong feature length");
  if (sentence_count < 1) throw ContractViolation("run_topic_net: need at least one sentence");
  TopicBundle b;
  Var h = initial_hidden(m, star, init_hidden);
  for (std::size_t i = 0; i < sentence_count; ++i) {
    auto s = step(m, v, h);
    b.topics.push_back(s.topic);
    b.continue_probs.push_back(s.cont);
  }
  auto [g, alphas] = global_topic(b.topics, &b.alphas_uniform);
  b.global_topic = std::move(g);
  b.alphas = std::move(alphas);
  return b;
}

}  // namespace paragen
