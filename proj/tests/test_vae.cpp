#include <doctest.h>

#include <cmath>

#include "paragen/training.hpp"

using namespace paragen;

namespace {

Model vae_model(std::uint64_t seed = 1, std::size_t feat = 6, std::size_t hidden = 4) {
  Hyper hp;
  hp.feat_dim = feat;
  hp.hidden = hidden;
  hp.vocab = 8;
  hp.vae = true;
  return Model::init(hp, seed);
}

void fill(const ad::Var& v, double x) {
  for (auto& e : v->value) e = x;
}

LatentPosterior make_posterior(std::vector<double> mu, std::vector<double> log_var) {
  LatentPosterior p;
  const std::size_t n = mu.size();
  p.mu = ad::constant(std::move(mu), {n});
  p.log_var = ad::constant(std::move(log_var), {n});
  return p;
}

}  // namespace

TEST_CASE("reparameterize: zero eps returns mu") {
  auto p = make_posterior({1.5, -2.0}, {0.3, -0.7});
  auto z = reparameterize(p, {0.0, 0.0});
  CHECK(z->value[0] == doctest::Approx(1.5));
  CHECK(z->value[1] == doctest::Approx(-2.0));
}

TEST_CASE("reparameterize: unit variance shifts by eps") {
  auto p = make_posterior({1.0, 2.0}, {0.0, 0.0});
  auto z = reparameterize(p, {0.25, -1.5});
  CHECK(z->value[0] == doctest::Approx(1.25));
  CHECK(z->value[1] == doctest::Approx(0.5));
}

TEST_CASE("reparameterize: hand-computed scale") {
  // sigma = exp(ln 4 / 2) = 2, z = 1 + 2 * 0.5 = 2
  auto p = make_posterior({1.0}, {std::log(4.0)});
  auto z = reparameterize(p, {0.5});
  CHECK(z->value[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(reparameterize(p, {0.5, 0.5}), ContractViolation);
}

TEST_CASE("reparameterize matches sample moments") {
  auto p = make_posterior({0.7, -0.3}, {std::log(0.25), std::log(2.25)});
  Rng rng(314);
  const int n = 200000;
  double s1[2] = {0, 0}, s2[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    auto z = reparameterize(p, {rng.normal(), rng.normal()});
    for (int d = 0; d < 2; ++d) {
      s1[d] += z->value[d];
      s2[d] += z->value[d] * z->value[d];
    }
  }
  const double mean0 = s1[0] / n, mean1 = s1[1] / n;
  CHECK(mean0 == doctest::Approx(0.7).epsilon(0.02));
  CHECK(mean1 == doctest::Approx(-0.3).epsilon(0.05));
  CHECK(s2[0] / n - mean0 * mean0 == doctest::Approx(0.25).epsilon(0.02));
  CHECK(s2[1] / n - mean1 * mean1 == doctest::Approx(2.25).epsilon(0.02));
}

TEST_CASE("kl of the standard normal posterior is zero") {
  auto p = make_posterior({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  CHECK(kl_to_standard_normal(p)->value[0] == doctest::Approx(0.0));
}

TEST_CASE("kl hand values") {
  // mu = 1, sigma = 1: KL = 1/2
  CHECK(kl_to_standard_normal(make_posterior({1.0}, {0.0}))->value[0] ==
        doctest::Approx(0.5).epsilon(1e-12));
  // mu = 0, ln sigma^2 = 1: KL = (e - 2) / 2
  CHECK(kl_to_standard_normal(make_posterior({0.0}, {1.0}))->value[0] ==
        doctest::Approx((std::exp(1.0) - 2.0) / 2.0).epsilon(1e-12));
  // dimensions add up
  CHECK(kl_to_standard_normal(make_posterior({1.0, 1.0}, {0.0, 0.0}))->value[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kl is non-negative over a parameter grid") {
  for (int mi = -4; mi <= 4; ++mi) {
    for (int li = -6; li <= 6; ++li) {
      auto p = make_posterior({mi * 0.5}, {li * 0.5});
      CHECK(kl_to_standard_normal(p)->value[0] >= -1e-12);
    }
  }
}

TEST_CASE("kl gradient matches finite differences") {
  auto mu = ad::param("mu", {3}, {0.4, -1.2, 0.9});
  auto lv = ad::param("lv", {3}, {-0.5, 0.3, 1.1});
  auto f = [&] {
    LatentPosterior p{mu, lv};
    return kl_to_standard_normal(p);
  };
  CHECK(ad::grad_check(f, {mu, lv}, 1e-5) < 1e-6);
}

TEST_CASE("zero encoder head gives the standard normal posterior") {
  auto m = vae_model(3);
  fill(m.enc_head.w, 0.0);
  fill(m.enc_head.b, 0.0);
  auto p = encode(m, std::vector<double>(6, 0.2), {{3, 4}, {5}});
  for (double v : p.mu->value) CHECK(v == 0.0);
  for (double v : p.log_var->value) CHECK(v == 0.0);
  CHECK(kl_to_standard_normal(p)->value[0] == doctest::Approx(0.0));
}

TEST_CASE("posterior heads split the 2H output") {
  auto m = vae_model(4, 6, 4);
  auto h = ad::constant({0.2, -0.4, 0.6, 0.1}, {4});
  auto p = posterior_from_hidden(m, h);
  CHECK(p.mu->size() == 4);
  CHECK(p.log_var->size() == 4);
  auto raw = nn::apply(m.enc_head, h);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(p.mu->value[i] == raw->value[i]);
    CHECK(p.log_var->value[i] == raw->value[i + 4]);
  }
}

TEST_CASE("non-vae models reject the vae entry points") {
  Hyper hp;
  hp.feat_dim = 6;
  hp.hidden = 4;
  hp.vocab = 8;
  auto m = Model::init(hp, 5);
  auto h = ad::zeros({4});
  CHECK_THROWS_AS(posterior_from_hidden(m, h), ContractViolation);
  CHECK_THROWS_AS(prime_hidden_from_latent(m, h), ContractViolation);
}

TEST_CASE("neutral injection reduces decode_with_latent to plain generation") {
  auto m = vae_model(8);
  fill(m.inject.w, 0.0);
  fill(m.inject.b, 0.0);
  fill(m.sent_rnn.bh, 0.0);  // priming step from zero then stays at zero
  std::vector<double> feat = {0.3, -0.8, 0.5, 0.2, -0.1, 0.7};
  auto primed = decode_with_latent(m, {1.0, -2.0, 0.5, 3.0}, feat, GenConfig{});
  auto plain = generate_paragraph(m, feat, GenConfig{});
  CHECK(primed == plain);
}

TEST_CASE("different latents can produce different hidden primes") {
  auto m = vae_model(9);
  auto z1 = ad::constant({2.0, -2.0, 1.0, 0.5}, {4});
  auto z2 = ad::constant({-2.0, 2.0, -1.0, -0.5}, {4});
  auto h1 = prime_hidden_from_latent(m, z1);
  auto h2 = prime_hidden_from_latent(m, z2);
  bool differs = false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (h1->value[i] != h2->value[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("elbo gradient on a tiny model matches finite differences") {
  auto m = vae_model(13, 5, 3);
  corpus::ParagraphSample sample;
  sample.features = {0.2, -0.4, 0.8, 0.1, -0.9};
  sample.sentences = {{3, 4}, {6}};
  std::vector<double> eps = {0.3, -0.6, 0.2};

  std::vector<ad::Var> params;
  for (const auto& [name, p] : m.store.params()) params.push_back(p);
  auto f = [&] {
    m.store.zero_grad();
    return example_loss(m, sample, LossWeights{}, 1.0, &eps).total;
  };
  // 1e-4 step: smaller steps run into fd roundoff on near-zero coordinates
  CHECK(ad::grad_check(f, params, 1e-4) < 1e-4);
}
