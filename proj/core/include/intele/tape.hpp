#pragma once

#include <functional>
#include <vector>

#include "intele/tensor.hpp"

namespace intele {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  int node = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so walking them
// backwards is a valid topological order and visits each node exactly once.
// A tape is confined to a single thread and rebuilt for every batch; calling
// backward() a second time on the same tape is an error.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.node].value; }
  const Tensor& grad(Var v) const { return nodes_[v.node].grad; }

  // Seeds dLoss/dLoss = 1 and accumulates gradients into every node that
  // feeds the loss; untouched nodes keep zero gradients.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Internal surface for the op implementations. The backward callback
  // receives the tape and the node's accumulated output gradient.
  using BackFn = std::function<void(Tape&, const Tensor&)>;
  int add_node(Tensor value, BackFn back, const char* op);
  Tensor& grad_mut(int node) { return nodes_[node].grad; }
  const Tensor& node_value(int node) const { return nodes_[node].value; }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackFn back;
    const char* op;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---- differentiable operations -------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);           // elementwise
Var scale(Var a, double c);
Var add_rowvec(Var a, Var b);    // a: [m x n], b: [1 x n], broadcast over rows
Var scale_rows(Var a, const std::vector<double>& w);  // row i scaled by w[i]
Var sum(Var a);                  // -> scalar

Var leaky_relu(Var x, double slope);
Var sigmoid(Var x);
Var tanh(Var x);

// Sum of squared elementwise differences -> scalar.
Var sq_error(Var x, Var x_hat);

// Numerically stable binary cross-entropy on logits, summed over elements.
// targets must hold values in {0,1} and match the logits' shape.
Var bce_with_logits(Var logits, const Tensor& targets);

// ---- plain (non-tape) numeric helpers shared with the forward-only path ---

double sigmoid_value(double x);          // stable, clamped into (0,1)
double bce_with_logits_value(double logit, double target);

}  // namespace intele
