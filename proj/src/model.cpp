#include "paragen/model.hpp"

namespace paragen {

Model Model::init(const Hyper& hp, std::uint64_t seed) {
  if (hp.vocab < 3) throw ContractViolation("model init: vocabulary must include PAD/BOS/EOS");
  if (hp.hidden == 0 || hp.feat_dim == 0 || hp.max_sentences == 0) {
    throw ContractViolation("model init: invalid hyperparameters");
  }
  Model m;
  m.hp = hp;
  Rng rng(seed);
  const std::size_t h = hp.hidden;

  m.sent_rnn = m.store.create_gru("topic.rnn", hp.feat_dim, h, rng);
  m.stop_head = m.store.create_dense("topic.stop", h, 1, nn::Activation::sigmoid, rng);
  m.topic_fc1 = m.store.create_dense("topic.fc1", h, h, nn::Activation::selu, rng);
  m.topic_fc2 = m.store.create_dense("topic.fc2", h, h, nn::Activation::identity, rng);
  if (hp.use_stars) {
    m.star_emb = m.store.create_embedding("topic.star", 5, h, rng);
  }

  m.coh_fc1 = m.store.create_dense("sent.coh1", h, h, nn::Activation::selu, rng);
  m.coh_fc2 = m.store.create_dense("sent.coh2", h, h, nn::Activation::identity, rng);
  m.gate = m.store.create_gru("sent.gate", h, h, rng);
  m.word1 = m.store.create_gru("sent.word1", 2 * h, h, rng);
  m.word2 = m.store.create_gru("sent.word2", h, h, rng);
  m.out_head = m.store.create_dense("sent.out", h, hp.vocab, nn::Activation::softmax, rng);
  m.word_emb = m.store.create_embedding("sent.emb", hp.vocab, h, rng);

  if (hp.vae) {
    m.enc_head = m.store.create_dense("vae.enc", h, 2 * h, nn::Activation::identity, rng);
    m.inject = m.store.create_dense("vae.inject", h, hp.feat_dim, nn::Activation::identity, rng);
  }
  return m;
}

}  // namespace paragen
