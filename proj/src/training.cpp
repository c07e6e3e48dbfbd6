#include "paragen/training.hpp"

#include <algorithm>
#include <cmath>

namespace paragen {

namespace {

Var neg_log(const Var& p) { return ad::scale(ad::log_act(p), -1.0); }

Var bce(const Var& u, int target) {
  if (target == 1) return neg_log(u);
  return neg_log(ad::sub(ad::scalar(1.0), u));
}

void check_sample(const Model& m, const corpus::ParagraphSample& s) {
  for (const auto& sent : s.sentences) {
    for (int tok : sent) {
      if (tok < 0 || static_cast<std::size_t>(tok) >= m.hp.vocab) {
        throw ContractViolation("token id outside vocabulary: " + std::to_string(tok));
      }
    }
  }
}

}  // namespace

LossBreakdown paragraph_loss(const std::vector<Var>& continue_probs,
                             const std::vector<std::vector<Var>>& word_dists,
                             const std::vector<std::vector<int>>& sentences,
                             const LossWeights& w) {
  const std::size_t s = sentences.size();
  if (s == 0 || continue_probs.size() != s || word_dists.size() != s) {
    throw ContractViolation("paragraph_loss: output/target length mismatch");
  }
  LossBreakdown out;
  Var stop_sum;
  Var word_sum;
  for (std::size_t i = 0; i < s; ++i) {
    const int continue_target = i + 1 < s ? 1 : 0;
    auto term = bce(continue_probs[i], continue_target);
    stop_sum = stop_sum ? ad::add(stop_sum, term) : term;

    if (word_dists[i].size() != sentences[i].size() + 1) {
      throw ContractViolation("paragraph_loss: word distribution count mismatch in sentence " +
                              std::to_string(i));
    }
    for (std::size_t j = 0; j < word_dists[i].size(); ++j) {
      const int target = j < sentences[i].size() ? sentences[i][j] : kEosId;
      auto ce = neg_log(ad::pick(word_dists[i][j], static_cast<std::size_t>(target)));
      word_sum = word_sum ? ad::add(word_sum, ce) : ce;
      ++out.word_targets;
    }
  }
  out.stop = stop_sum;
  out.word = word_sum;
  out.total = ad::add(ad::scale(stop_sum, w.lambda_s), ad::scale(word_sum, w.lambda_w));
  return out;
}

ExampleLoss example_loss(Model& m, const corpus::ParagraphSample& sample,
                         const LossWeights& w, double kl_weight,
                         const std::vector<double>* eps) {
  check_sample(m, sample);
  // datasets may carry ratings the model is not conditioned on
  const auto stars = m.hp.use_stars ? sample.stars : std::nullopt;
  ExampleLoss out;
  if (m.hp.vae) {
    if (!eps) throw ContractViolation("example_loss: vae mode requires eps");
    auto enc_pass = teacher_forced_forward(m, sample.features, sample.sentences, stars);
    auto posterior = posterior_from_hidden(m, enc_pass.final_hidden);
    auto z = reparameterize(posterior, *eps);
    auto prime = prime_hidden_from_latent(m, z);
    auto dec_pass =
        teacher_forced_forward(m, sample.features, sample.sentences, stars, &prime);
    auto recon =
        paragraph_loss(dec_pass.bundle.continue_probs, dec_pass.word_dists, sample.sentences, w);
    auto kl = kl_to_standard_normal(posterior);
    out.total = ad::add(recon.total, ad::scale(kl, kl_weight));
    out.stop_loss = recon.stop->value[0];
    out.word_loss = recon.word->value[0];
    out.kl = kl->value[0];
    out.word_targets = recon.word_targets;
  } else {
    auto pass = teacher_forced_forward(m, sample.features, sample.sentences, stars);
    auto loss =
        paragraph_loss(pass.bundle.continue_probs, pass.word_dists, sample.sentences, w);
    out.total = loss.total;
    out.stop_loss = loss.stop->value[0];
    out.word_loss = loss.word->value[0];
    out.word_targets = loss.word_targets;
  }
  return out;
}

void adam_step(nn::ParamStore& store, AdamState& state, double lr) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (auto& [name, p] : store.params()) {
    p->ensure_grad();
    auto& [mv, vv] = state.moments[name];
    if (mv.size() != p->size()) mv.assign(p->size(), 0.0);
    if (vv.size() != p->size()) vv.assign(p->size(), 0.0);
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      if (std::isnan(g)) {
        throw ContractViolation("NaN gradient in parameter " + name);
      }
      mv[i] = state.beta1 * mv[i] + (1.0 - state.beta1) * g;
      vv[i] = state.beta2 * vv[i] + (1.0 - state.beta2) * g * g;
      const double mhat = mv[i] / bc1;
      const double vhat = vv[i] / bc2;
      p->value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double clip_gradients(nn::ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : store.params()) {
    p->ensure_grad();
    for (double g : p->grad) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& [name, p] : store.params()) {
      for (auto& g : p->grad) g *= s;
    }
  }
  return norm;
}

double lr_schedule_every(int epoch, double base, int halve_every) {
  if (epoch < 1) throw ContractViolation("lr_schedule: epoch is 1-based");
  if (halve_every <= 0) return base;
  const int halvings = (epoch - 1) / halve_every;
  return base * std::pow(2.0, -static_cast<double>(halvings));
}

double lr_schedule(int epoch, double base) { return lr_schedule_every(epoch, base, 5); }

std::vector<EpochStats> train(Model& m, const std::vector<corpus::ParagraphSample>& data,
                              const TrainConfig& cfg, AdamState* state, Rng* resume_rng,
                              int start_epoch, const EpochCallback& on_epoch) {
  if (data.empty()) throw ContractViolation("train: empty dataset");
  for (const auto& s : data) check_sample(m, s);

  AdamState local_state;
  AdamState& adam = state ? *state : local_state;
  Rng rng = resume_rng ? *resume_rng : Rng(cfg.seed ^ 0xA11CEull);

  std::vector<EpochStats> history;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = start_epoch + 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = lr_schedule_every(epoch, cfg.base_lr, cfg.lr_halve_every);
    double kl_w = cfg.kl_weight;
    if (cfg.kl_anneal_epochs > 0 && epoch <= cfg.kl_anneal_epochs) {
      kl_w = cfg.kl_weight * static_cast<double>(epoch) / cfg.kl_anneal_epochs;
    }

    // Fisher-Yates from the identity with our own draws: std::shuffle is not
    // pinned down, and starting fresh keeps the order a pure function of the
    // rng state (resumed runs must see the same visit order)
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    std::size_t total_words = 0;
    double word_sum = 0.0;
    for (std::size_t idx : order) {
      const auto& sample = data[idx];
      std::vector<double> eps;
      if (m.hp.vae) {
        eps.resize(m.hp.hidden);
        for (auto& e : eps) e = rng.normal();
      }
      m.store.zero_grad();
      auto loss = example_loss(m, sample, cfg.weights, kl_w, m.hp.vae ? &eps : nullptr);
      ad::backward(loss.total);
      clip_gradients(m.store, cfg.clip_norm);
      adam_step(m.store, adam, lr);
      stats.stop_loss += loss.stop_loss;
      stats.word_loss += loss.word_loss;
      stats.kl += loss.kl;
      word_sum += loss.word_loss;
      total_words += loss.word_targets;
    }
    const double n = static_cast<double>(data.size());
    stats.stop_loss /= n;
    stats.word_loss /= n;
    stats.kl /= n;
    stats.per_token_ce = word_sum / static_cast<double>(total_words);
    history.push_back(stats);
    if (on_epoch) on_epoch(stats, m, adam, rng);
  }
  return history;
}

double mean_word_ce(Model& m, const std::vector<corpus::ParagraphSample>& data) {
  if (data.empty()) throw ContractViolation("mean_word_ce: empty dataset");
  double sum = 0.0;
  std::size_t count = 0;
  LossWeights w;
  for (const auto& s : data) {
    auto pass = teacher_forced_forward(m, s.features, s.sentences, m.hp.use_stars ? s.stars : std::nullopt);
    auto loss = paragraph_loss(pass.bundle.continue_probs, pass.word_dists, s.sentences, w);
    sum += loss.word->value[0];
    count += loss.word_targets;
  }
  return sum / static_cast<double>(count);
}

}  // namespace paragen
