#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paragen/tensor.hpp"

namespace paragen::nn {

using ad::Var;

enum class Activation { identity, sigmoid, tanh, selu, softmax };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// weight (out x in), bias (out)
struct Dense {
  Var w;
  Var b;
  Activation act = Activation::identity;

  std::size_t in() const { return w->shape[1]; }
  std::size_t out() const { return w->shape[0]; }
};

Var apply(const Dense& d, const Var& x);

// Chung et al. convention: h' = (1-z) o h + z o h~,
// r = sigma(Wr x + Ur h + br), z = sigma(Wz x + Uz h + bz),
// h~ = tanh(Wh x + Uh (r o h) + bh)
struct Gru {
  Var wr, wz, wh;  // (hidden x in)
  Var ur, uz, uh;  // (hidden x hidden)
  Var br, bz, bh;  // (hidden)

  std::size_t in() const { return wr->shape[1]; }
  std::size_t hidden() const { return wr->shape[0]; }
};

Var gru_cell(const Var& x, const Var& h, const Gru& p);

struct Embedding {
  Var table;  // (rows x cols)

  std::size_t rows() const { return table->shape[0]; }
  std::size_t cols() const { return table->shape[1]; }
};

Var lookup(const Embedding& e, std::size_t id);

// Named parameter registry; iteration order is the sorted name order, which
// every consumer (Adam, checkpointing, clipping) relies on for determinism.
class ParamStore {
public:
  // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init
  Var create_weight(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);
  Var create_bias(const std::string& name, std::size_t len);

  Dense create_dense(const std::string& prefix, std::size_t in, std::size_t out,
                     Activation act, Rng& rng);
  Gru create_gru(const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng);
  Embedding create_embedding(const std::string& prefix, std::size_t rows, std::size_t cols,
                             Rng& rng);

  const std::map<std::string, Var>& params() const { return params_; }
  Var at(const std::string& name) const;
  void zero_grad();

private:
  Var insert(const std::string& name, Var v);
  std::map<std::string, Var> params_;
};

}  // namespace paragen::nn
