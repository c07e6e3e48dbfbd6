#include "paragen/vae.hpp"

namespace paragen {

LatentPosterior posterior_from_hidden(Model& m, const Var& final_hidden) {
  if (!m.hp.vae) throw ContractViolation("model was built without the vae heads");
  auto out = nn::apply(m.enc_head, final_hidden);
  LatentPosterior p;
  p.mu = ad::slice(out, 0, m.hp.hidden);
  p.log_var = ad::slice(out, m.hp.hidden, m.hp.hidden);
  return p;
}

LatentPosterior encode(Model& m, const std::vector<double>& features,
                       const std::vector<std::vector<int>>& sentences,
                       std::optional<int> star) {
  auto f = teacher_forced_forward(m, features, sentences, star);
  return posterior_from_hidden(m, f.final_hidden);
}

Var reparameterize(const LatentPosterior& p, const std::vector<double>& eps) {
  if (eps.size() != p.mu->size()) throw ContractViolation("reparameterize: eps length mismatch");
  auto sigma = ad::exp_act(ad::scale(p.log_var, 0.5));
  auto e = ad::constant(eps, {eps.size()});
  return ad::add(p.mu, ad::mul(sigma, e));
}

Var kl_to_standard_normal(const LatentPosterior& p) {
  const std::size_t h = p.mu->size();
  auto var = ad::exp_act(p.log_var);
  auto mu2 = ad::mul(p.mu, p.mu);
  auto ones = ad::constant(std::vector<double>(h, 1.0), {h});
  auto terms = ad::sub(ad::sub(ad::add(mu2, var), p.log_var), ones);
  return ad::scale(ad::sum(terms), 0.5);
}

Var prime_hidden_from_latent(Model& m, const Var& z) {
  if (!m.hp.vae) throw ContractViolation("model was built without the vae heads");
  auto projected = nn::apply(m.inject, z);
  return nn::gru_cell(projected, ad::zeros({m.hp.hidden}), m.sent_rnn);
}

Paragraph decode_with_latent(Model& m, const std::vector<double>& z,
                             const std::vector<double>& features, const GenConfig& cfg,
                             Rng* rng) {
  auto zv = ad::constant(z, {z.size()});
  auto prime = prime_hidden_from_latent(m, zv);
  return generate_paragraph(m, features, cfg, rng, &prime);
}

}  // namespace paragen
