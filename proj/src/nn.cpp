#include "paragen/nn.hpp"

#include <cmath>

namespace paragen::nn {

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  if (s == "selu") return Activation::selu;
  if (s == "softmax") return Activation::softmax;
  throw ParseError("unknown activation: " + s);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::selu: return "selu";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

Var apply(const Dense& d, const Var& x) {
  auto pre = ad::add(ad::matvec(d.w, x), d.b);
  switch (d.act) {
    case Activation::identity: return pre;
    case Activation::sigmoid: return ad::sigmoid(pre);
    case Activation::tanh: return ad::tanh_act(pre);
    case Activation::selu: return ad::selu(pre);
    case Activation::softmax: return ad::softmax(pre);
  }
  return pre;
}

Var gru_cell(const Var& x, const Var& h, const Gru& p) {
  if (x->size() != p.in() || h->size() != p.hidden()) {
    throw ContractViolation("gru_cell: dimension mismatch");
  }
  auto r = ad::sigmoid(ad::add(ad::add(ad::matvec(p.wr, x), ad::matvec(p.ur, h)), p.br));
  auto z = ad::sigmoid(ad::add(ad::add(ad::matvec(p.wz, x), ad::matvec(p.uz, h)), p.bz));
  auto cand =
      ad::tanh_act(ad::add(ad::add(ad::matvec(p.wh, x), ad::matvec(p.uh, ad::mul(r, h))), p.bh));
  auto keep = ad::sub(ad::constant(std::vector<double>(p.hidden(), 1.0), {p.hidden()}), z);
  return ad::add(ad::mul(keep, h), ad::mul(z, cand));
}

Var lookup(const Embedding& e, std::size_t id) {
  if (id >= e.rows()) throw ContractViolation("embedding lookup: id out of range");
  return ad::row(e.table, id);
}

Var ParamStore::insert(const std::string& name, Var v) {
  auto [it, ok] = params_.emplace(name, std::move(v));
  if (!ok) throw ContractViolation("duplicate parameter name: " + name);
  return it->second;
}

Var ParamStore::create_weight(const std::string& name, std::size_t rows, std::size_t cols,
                              Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  std::vector<double> data(rows * cols);
  for (auto& v : data) v = rng.uniform(-bound, bound);
  return insert(name, ad::param(name, {rows, cols}, std::move(data)));
}

Var ParamStore::create_bias(const std::string& name, std::size_t len) {
  return insert(name, ad::param(name, {len}, std::vector<double>(len, 0.0)));
}

Dense ParamStore::create_dense(const std::string& prefix, std::size_t in, std::size_t out,
                               Activation act, Rng& rng) {
  Dense d;
  d.w = create_weight(prefix + ".w", out, in, rng);
  d.b = create_bias(prefix + ".b", out);
  d.act = act;
  return d;
}

Gru ParamStore::create_gru(const std::string& prefix, std::size_t in, std::size_t hidden,
                           Rng& rng) {
  Gru g;
  g.wr = create_weight(prefix + ".wr", hidden, in, rng);
  g.wz = create_weight(prefix + ".wz", hidden, in, rng);
  g.wh = create_weight(prefix + ".wh", hidden, in, rng);
  g.ur = create_weight(prefix + ".ur", hidden, hidden, rng);
  g.uz = create_weight(prefix + ".uz", hidden, hidden, rng);
  g.uh = create_weight(prefix + ".uh", hidden, hidden, rng);
  g.br = create_bias(prefix + ".br", hidden);
  g.bz = create_bias(prefix + ".bz", hidden);
  g.bh = create_bias(prefix + ".bh", hidden);
  return g;
}

Embedding ParamStore::create_embedding(const std::string& prefix, std::size_t rows,
                                       std::size_t cols, Rng& rng) {
  Embedding e;
  e.table = create_weight(prefix + ".table", rows, cols, rng);
  return e;
}

Var ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractViolation("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p->zero_grad();
}

}  // namespace paragen::nn
