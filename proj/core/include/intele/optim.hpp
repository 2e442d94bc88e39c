#pragma once

#include <map>
#include <string>

#include "intele/tape.hpp"
#include "intele/tensor.hpp"

namespace intele {

// Named parameter collection. Names are unique and shapes are fixed once a
// parameter is added. Ordered map so iteration (init, stepping, serialization)
// is deterministic.
class ParamSet {
public:
  struct Entry {
    Tensor value;
    bool trainable = true;
  };

  void add(const std::string& name, Tensor value, bool trainable = true);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool trainable(const std::string& name) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }

private:
  std::map<std::string, Entry> entries_;
};

using GradMap = std::map<std::string, Tensor>;

// Ties a ParamSet to leaves of one tape for a single forward/backward pass.
// Parameters never touched by the forward pass report zero gradients.
class Binding {
public:
  Binding(Tape& tape, const ParamSet& params) : tape_(&tape), params_(&params) {}

  // Leaf for `name`, created on first use and cached.
  Var operator()(const std::string& name);

  // Gradients for every parameter in the set (zeros for unbound ones).
  // Valid after tape.backward().
  GradMap gradients() const;

  const ParamSet& params() const { return *params_; }

private:
  Tape* tape_;
  const ParamSet* params_;
  std::map<std::string, Var> bound_;
};

// p <- p - lr * (g + weight_decay * p) for every trainable parameter.
// A trainable parameter without an entry in `grads` is an error.
void sgd_step(ParamSet& params, const GradMap& grads, double lr, double weight_decay);

}  // namespace intele
