#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "paragen/common.hpp"

namespace paragen::ad {

class Node;
using Var = std::shared_ptr<Node>;

// One value in the recorded computation graph. Children hold shared
// ownership of their parents, so the tape for a loss is exactly the
// graph reachable from the loss node.
class Node {
public:
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // same length as value once backward touched it
  bool requires_grad = false;
  std::string name;  // nonempty for parameters

  std::vector<Var> parents;
  std::function<void(Node&)> backprop;  // pushes grad into parents

  std::size_t size() const { return value.size(); }
  bool is_scalar() const { return value.size() == 1; }

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
  void zero_grad() { grad.assign(value.size(), 0.0); }
};

std::size_t shape_count(const std::vector<std::size_t>& shape);

Var constant(std::vector<double> data, std::vector<std::size_t> shape);
Var scalar(double v);
Var zeros(std::vector<std::size_t> shape);
Var param(std::string name, std::vector<std::size_t> shape, std::vector<double> data);

// elementwise and linear algebra
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);     // elementwise
Var scale(const Var& a, double c);
Var smul(const Var& s, const Var& v);    // scalar node times tensor
Var sdiv(const Var& a, const Var& b);    // scalar / scalar
Var matvec(const Var& w, const Var& x);  // (m,n) x (n) -> (m)
Var concat(const Var& a, const Var& b);
Var slice(const Var& x, std::size_t offset, std::size_t len);
Var row(const Var& m, std::size_t r);
Var pick(const Var& x, std::size_t idx);  // scalar element

// activations
Var sigmoid(const Var& x);
Var tanh_act(const Var& x);
Var selu(const Var& x);
Var softmax(const Var& x);  // vector, max-subtracted
Var exp_act(const Var& x);
Var log_act(const Var& x);

// reductions
Var sum(const Var& x);
Var dot(const Var& a, const Var& b);
Var norm2(const Var& x);

// Reverse pass from a scalar loss. Zeroes the gradients of every node it
// reaches, then accumulates; deterministic given the same graph.
void backward(const Var& loss);

// backward() plus gradient collection; parameters not reached by the tape
// come back as zero gradients.
std::map<std::string, std::vector<double>> backward_named(const Var& loss,
                                                          const std::vector<Var>& params);

// Max relative finite-difference error over every entry of every parameter,
// |analytic - central| / max(1e-12, |analytic| + |central|). `f` must be
// deterministic and rebuild its graph from the live parameter values.
// A NaN on either side reports +inf and names the offender in `worst`.
double grad_check(const std::function<Var()>& f, const std::vector<Var>& params,
                  double eps, std::string* worst = nullptr);

// per-coordinate step-size sweep: reports the minimum central-difference
// relative error over the given steps (see the comment in the implementation)
double grad_check(const std::function<Var()>& f, const std::vector<Var>& params,
                  const std::vector<double>& steps, std::string* worst = nullptr);

}  // namespace paragen::ad
