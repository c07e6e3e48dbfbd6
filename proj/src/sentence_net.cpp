#include "paragen/sentence_net.hpp"

namespace paragen {

Var couple(const Var& topic, const Var& coherence, double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0)) {
    throw ContractViolation("couple: need alpha, beta >= 0 and not both zero");
  }
  if (topic->shape != coherence->shape) throw ContractViolation("couple: shape mismatch");
  const double denom = alpha + beta;
  return ad::add(ad::scale(topic, alpha / denom), ad::scale(coherence, beta / denom));
}

Var coherence_transform(Model& m, const Var& h_last) {
  ++m.coherence_transform_count;
  return nn::apply(m.coh_fc2, nn::apply(m.coh_fc1, h_last));
}

Var gate_with_global(Model& m, const Var& t_coupled, const Var& g) {
  return nn::gru_cell(t_coupled, g, m.gate);
}

namespace {

struct WordStep {
  Var dist;
  Var h2;
};

WordStep word_step(Model& m, const Var& t_prime, int prev_token, Var& h1, Var& h2) {
  auto emb = nn::lookup(m.word_emb, static_cast<std::size_t>(prev_token));
  h1 = nn::gru_cell(ad::concat(emb, t_prime), h1, m.word1);
  h2 = nn::gru_cell(h1, h2, m.word2);
  return {nn::apply(m.out_head, h2), h2};
}

int greedy_pick(const Var& dist) {
  int best = 0;
  double bv = dist->value[0];
  for (std::size_t i = 1; i < dist->size(); ++i) {
    if (dist->value[i] > bv) {
      bv = dist->value[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

int sample_pick(const Var& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < dist->size(); ++i) {
    acc += dist->value[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(dist->size()) - 1;
}

}  // namespace

SentenceResult generate_sentence(Model& m, const Var& t_prime, std::size_t max_words,
                                 DecodeMode mode, Rng* rng) {
  if (mode == DecodeMode::sample && !rng) {
    throw ContractViolation("generate_sentence: sampling requires an rng");
  }
  SentenceResult r;
  Var h1 = ad::zeros({m.hp.hidden});
  Var h2 = ad::zeros({m.hp.hidden});
  int prev = kBosId;
  for (std::size_t j = 0; j < max_words; ++j) {
    auto ws = word_step(m, t_prime, prev, h1, h2);
    r.dists.push_back(ws.dist);
    r.h_final = ws.h2;
    const int tok =
        mode == DecodeMode::greedy ? greedy_pick(ws.dist) : sample_pick(ws.dist, *rng);
    if (tok == kEosId) break;
    r.tokens.push_back(tok);
    prev = tok;
  }
  return r;
}

SentenceResult run_sentence_forced(Model& m, const Var& t_prime,
                                   const std::vector<int>& tokens) {
  SentenceResult r;
  Var h1 = ad::zeros({m.hp.hidden});
  Var h2 = ad::zeros({m.hp.hidden});
  int prev = kBosId;
  // one step per ground-truth word, plus the step whose target is EOS
  for (std::size_t j = 0; j <= tokens.size(); ++j) {
    auto ws = word_step(m, t_prime, prev, h1, h2);
    r.dists.push_back(ws.dist);
    r.h_final = ws.h2;
    if (j < tokens.size()) prev = tokens[j];
  }
  r.tokens = tokens;
  return r;
}

Paragraph generate_paragraph(Model& m, const std::vector<double>& features,
                             const GenConfig& cfg, Rng* rng, const Var* prime_hidden) {
  auto v = ad::constant(features, {features.size()});
  auto bundle = run_topic_net(m, v, m.hp.max_sentences, cfg.star, prime_hidden);
  Var g = m.hp.no_global ? ad::zeros({m.hp.hidden}) : bundle.global_topic;
  Var c = ad::zeros({m.hp.hidden});

  Paragraph out;
  for (std::size_t i = 0; i < bundle.topics.size(); ++i) {
    auto tc = couple(bundle.topics[i], c, m.hp.couple_alpha, m.hp.couple_beta);
    auto tp = gate_with_global(m, tc, g);
    auto sent = generate_sentence(m, tp, m.hp.max_words, cfg.mode, rng);
    out.push_back(sent.tokens);
    if (!m.hp.no_coherence && i + 1 < bundle.topics.size()) {
      c = coherence_transform(m, sent.h_final);
    }
  }
  return out;
}

ForcedForward teacher_forced_forward(Model& m, const std::vector<double>& features,
                                     const std::vector<std::vector<int>>& sentences,
                                     std::optional<int> star, const Var* prime_hidden) {
  if (sentences.empty()) throw ContractViolation("teacher_forced_forward: empty paragraph");
  auto v = ad::constant(features, {features.size()});
  ForcedForward f;
  GenConfig cfg;
  cfg.star = star;
  f.bundle = run_topic_net_forced(m, v, sentences.size(), star, prime_hidden);
  Var g = m.hp.no_global ? ad::zeros({m.hp.hidden}) : f.bundle.global_topic;
  Var c = ad::zeros({m.hp.hidden});
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto tc = couple(f.bundle.topics[i], c, m.hp.couple_alpha, m.hp.couple_beta);
    auto tp = gate_with_global(m, tc, g);
    auto sent = run_sentence_forced(m, tp, sentences[i]);
    f.word_dists.push_back(std::move(sent.dists));
    f.final_hidden = sent.h_final;
    if (!m.hp.no_coherence && i + 1 < sentences.size()) {
      c = coherence_transform(m, sent.h_final);
    }
  }
  return f;
}

}  // namespace paragen
