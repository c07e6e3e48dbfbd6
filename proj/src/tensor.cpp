#include "paragen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace paragen::ad {

namespace {

constexpr double kSeluLambda = 1.0507009873554805;
constexpr double kSeluAlpha = 1.6732632423543772;

Var make_node(std::vector<std::size_t> shape, std::vector<double> value,
              std::vector<Var> parents) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a->shape != b->shape) {
    throw ContractViolation(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

std::size_t shape_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Var constant(std::vector<double> data, std::vector<std::size_t> shape) {
  if (shape_count(shape) != data.size()) {
    throw ContractViolation("constant: shape does not match data length");
  }
  return make_node(std::move(shape), std::move(data), {});
}

Var scalar(double v) { return constant({v}, {1}); }

Var zeros(std::vector<std::size_t> shape) {
  std::vector<double> data(shape_count(shape), 0.0);
  return make_node(std::move(shape), std::move(data), {});
}

Var param(std::string name, std::vector<std::size_t> shape, std::vector<double> data) {
  if (shape_count(shape) != data.size()) {
    throw ContractViolation("param " + name + ": shape does not match data length");
  }
  auto n = make_node(std::move(shape), std::move(data), {});
  n->requires_grad = true;
  n->name = std::move(name);
  return n;
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  auto n = make_node(a->shape, std::move(out), {a, b});
  n->backprop = [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto& p = self.parents[k];
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  };
  return n;
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
  auto n = make_node(a->shape, std::move(out), {a, b});
  n->backprop = [](Node& self) {
    auto& a = self.parents[0];
    auto& b = self.parents[1];
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) b->grad[i] -= self.grad[i];
    }
  };
  return n;
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  auto n = make_node(a->shape, std::move(out), {a, b});
  n->backprop = [](Node& self) {
    auto& a = self.parents[0];
    auto& b = self.parents[1];
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        a->grad[i] += self.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        b->grad[i] += self.grad[i] * a->value[i];
    }
  };
  return n;
}

Var scale(const Var& a, double c) {
  std::vector<double> out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * c;
  auto n = make_node(a->shape, std::move(out), {a});
  n->backprop = [c](Node& self) {
    auto& a = self.parents[0];
    if (!a->requires_grad) return;
    a->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i] * c;
  };
  return n;
}

Var smul(const Var& s, const Var& v) {
  if (!s->is_scalar()) throw ContractViolation("smul: first argument must be scalar");
  const double sv = s->value[0];
  std::vector<double> out(v->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * v->value[i];
  auto n = make_node(v->shape, std::move(out), {s, v});
  n->backprop = [](Node& self) {
    auto& s = self.parents[0];
    auto& v = self.parents[1];
    if (s->requires_grad) {
      s->ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * v->value[i];
      s->grad[0] += acc;
    }
    if (v->requires_grad) {
      v->ensure_grad();
      const double sv = s->value[0];
      for (std::size_t i = 0; i < self.grad.size(); ++i) v->grad[i] += self.grad[i] * sv;
    }
  };
  return n;
}

Var sdiv(const Var& a, const Var& b) {
  if (!a->is_scalar() || !b->is_scalar()) throw ContractViolation("sdiv: scalars required");
  auto n = make_node({1}, {a->value[0] / b->value[0]}, {a, b});
  n->backprop = [](Node& self) {
    auto& a = self.parents[0];
    auto& b = self.parents[1];
    const double g = self.grad[0];
    const double bv = b->value[0];
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad[0] += g / bv;
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad[0] -= g * a->value[0] / (bv * bv);
    }
  };
  return n;
}

Var matvec(const Var& w, const Var& x) {
  if (w->shape.size() != 2 || x->shape.size() != 1 || w->shape[1] != x->shape[0]) {
    throw ContractViolation("matvec: shape mismatch");
  }
  const std::size_t m = w->shape[0], k = w->shape[1];
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wr = w->value.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) acc += wr[j] * x->value[j];
    out[i] = acc;
  }
  auto n = make_node({m}, std::move(out), {w, x});
  n->backprop = [m, k](Node& self) {
    auto& w = self.parents[0];
    auto& x = self.parents[1];
    if (w->requires_grad) {
      w->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double g = self.grad[i];
        double* wg = w->grad.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) wg[j] += g * x->value[j];
      }
    }
    if (x->requires_grad) {
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double g = self.grad[i];
        const double* wr = w->value.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) x->grad[j] += g * wr[j];
      }
    }
  };
  return n;
}

Var concat(const Var& a, const Var& b) {
  if (a->shape.size() != 1 || b->shape.size() != 1) {
    throw ContractViolation("concat: vectors required");
  }
  std::vector<double> out;
  out.reserve(a->size() + b->size());
  out.insert(out.end(), a->value.begin(), a->value.end());
  out.insert(out.end(), b->value.begin(), b->value.end());
  auto n = make_node({a->size() + b->size()}, std::move(out), {a, b});
  n->backprop = [](Node& self) {
    auto& a = self.parents[0];
    auto& b = self.parents[1];
    const std::size_t na = a->size();
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < na; ++i) a->grad[i] += self.grad[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < b->size(); ++i) b->grad[i] += self.grad[na + i];
    }
  };
  return n;
}

Var slice(const Var& x, std::size_t offset, std::size_t len) {
  if (x->shape.size() != 1 || offset + len > x->size()) {
    throw ContractViolation("slice: out of range");
  }
  std::vector<double> out(x->value.begin() + offset, x->value.begin() + offset + len);
  auto n = make_node({len}, std::move(out), {x});
  n->backprop = [offset](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) x->grad[offset + i] += self.grad[i];
  };
  return n;
}

Var row(const Var& m, std::size_t r) {
  if (m->shape.size() != 2 || r >= m->shape[0]) throw ContractViolation("row: out of range");
  const std::size_t cols = m->shape[1];
  std::vector<double> out(m->value.begin() + r * cols, m->value.begin() + (r + 1) * cols);
  auto n = make_node({cols}, std::move(out), {m});
  n->backprop = [r, cols](Node& self) {
    auto& m = self.parents[0];
    if (!m->requires_grad) return;
    m->ensure_grad();
    for (std::size_t i = 0; i < cols; ++i) m->grad[r * cols + i] += self.grad[i];
  };
  return n;
}

Var pick(const Var& x, std::size_t idx) {
  if (idx >= x->size()) throw ContractViolation("pick: index out of range");
  auto n = make_node({1}, {x->value[idx]}, {x});
  n->backprop = [idx](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    x->grad[idx] += self.grad[0];
  };
  return n;
}

Var sigmoid(const Var& x) {
  std::vector<double> out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x->value[i]));
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      x->grad[i] += self.grad[i] * y * (1.0 - y);
    }
  };
  return n;
}

Var tanh_act(const Var& x) {
  std::vector<double> out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x->value[i]);
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      x->grad[i] += self.grad[i] * (1.0 - y * y);
    }
  };
  return n;
}

Var selu(const Var& x) {
  std::vector<double> out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x->value[i];
    out[i] = v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * (std::exp(v) - 1.0);
  }
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double v = x->value[i];
      const double d = v > 0.0 ? kSeluLambda : self.value[i] + kSeluLambda * kSeluAlpha;
      x->grad[i] += self.grad[i] * d;
    }
  };
  return n;
}

Var softmax(const Var& x) {
  if (x->shape.size() != 1) throw ContractViolation("softmax: vector required");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x->value) mx = std::max(mx, v);
  std::vector<double> out(x->size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(x->value[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    double inner = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) inner += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x->grad[i] += self.value[i] * (self.grad[i] - inner);
    }
  };
  return n;
}

Var exp_act(const Var& x) {
  std::vector<double> out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x->value[i]);
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      x->grad[i] += self.grad[i] * self.value[i];
  };
  return n;
}

Var log_act(const Var& x) {
  std::vector<double> out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(x->value[i]);
  auto n = make_node(x->shape, std::move(out), {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      x->grad[i] += self.grad[i] / x->value[i];
  };
  return n;
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (double v : x->value) acc += v;
  auto n = make_node({1}, {acc}, {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    x->ensure_grad();
    const double g = self.grad[0];
    for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
  };
  return n;
}

Var dot(const Var& a, const Var& b) {
  check_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += a->value[i] * b->value[i];
  auto n = make_node({1}, {acc}, {a, b});
  n->backprop = [](Node& self) {
    auto& a = self.parents[0];
    auto& b = self.parents[1];
    const double g = self.grad[0];
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g * b->value[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < b->grad.size(); ++i) b->grad[i] += g * a->value[i];
    }
  };
  return n;
}

Var norm2(const Var& x) {
  double acc = 0.0;
  for (double v : x->value) acc += v * v;
  const double nv = std::sqrt(acc);
  auto n = make_node({1}, {nv}, {x});
  n->backprop = [](Node& self) {
    auto& x = self.parents[0];
    if (!x->requires_grad) return;
    const double nv = self.value[0];
    if (nv == 0.0) return;  // subgradient 0 at the origin
    x->ensure_grad();
    const double g = self.grad[0];
    for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g * x->value[i] / nv;
  };
  return n;
}

void backward(const Var& loss) {
  if (!loss->is_scalar()) throw ContractViolation("backward: loss must be scalar");
  if (!loss->requires_grad) {
    loss->zero_grad();
    loss->grad[0] = 1.0;
    return;
  }
  // iterative post-order DFS; graphs can be tens of thousands of nodes deep
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    bool descended = false;
    while (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
        descended = true;
        break;
      }
    }
    if (!descended && next >= node->parents.size()) {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->zero_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop(**it);
  }
}

std::map<std::string, std::vector<double>> backward_named(const Var& loss,
                                                          const std::vector<Var>& params) {
  for (const auto& p : params) p->zero_grad();
  backward(loss);
  std::map<std::string, std::vector<double>> out;
  for (const auto& p : params) {
    p->ensure_grad();
    out[p->name] = p->grad;
  }
  return out;
}

double grad_check(const std::function<Var()>& f, const std::vector<Var>& params,
                  const std::vector<double>& steps, std::string* worst) {
  if (steps.empty()) throw ContractViolation("grad_check: needs at least one step size");
  for (double eps : steps) {
    if (eps <= 0.0) throw ContractViolation("grad_check: eps must be positive");
  }
  for (const auto& p : params) p->zero_grad();
  auto out = f();
  backward(out);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    p->ensure_grad();
    analytic.push_back(p->grad);
  }

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double a = analytic[pi][i];
      // no single step suits every coordinate: big steps straddle activation
      // kinks, small steps lose tiny gradients to roundoff. the analytic value
      // must agree with the central difference at some step in the sweep.
      double best_rel = std::numeric_limits<double>::infinity();
      for (double eps : steps) {
        const double saved = p->value[i];
        p->value[i] = saved + eps;
        const double fp = f()->value[0];
        p->value[i] = saved - eps;
        const double fm = f()->value[0];
        p->value[i] = saved;
        const double central = (fp - fm) / (2.0 * eps);
        if (std::isnan(a) || std::isnan(central)) {
          if (worst) *worst = p->name + "[" + std::to_string(i) + "]: NaN";
          return std::numeric_limits<double>::infinity();
        }
        const double rel =
            std::abs(a - central) / std::max(1e-12, std::abs(a) + std::abs(central));
        best_rel = std::min(best_rel, rel);
      }
      if (best_rel > max_rel) {
        max_rel = best_rel;
        if (worst) *worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return max_rel;
}

double grad_check(const std::function<Var()>& f, const std::vector<Var>& params,
                  double eps, std::string* worst) {
  return grad_check(f, params, std::vector<double>{eps}, worst);
}

}  // namespace paragen::ad
