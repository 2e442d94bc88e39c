#include "intele/optim.hpp"

#include <stdexcept>

namespace intele {

void ParamSet::add(const std::string& name, Tensor value, bool trainable) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate parameter " + name);
  entries_.emplace(name, Entry{std::move(value), trainable});
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamSet: unknown parameter " + name);
  return it->second.value;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamSet: unknown parameter " + name);
  return it->second.value;
}

bool ParamSet::trainable(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("ParamSet: unknown parameter " + name);
  return it->second.trainable;
}

Var Binding::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = tape_->leaf(params_->at(name));
  bound_.emplace(name, v);
  return v;
}

GradMap Binding::gradients() const {
  GradMap out;
  for (const auto& [name, entry] : params_->entries()) {
    auto it = bound_.find(name);
    if (it != bound_.end()) {
      out.emplace(name, tape_->grad(it->second));
    } else {
      out.emplace(name, Tensor::zeros_like(entry.value));
    }
  }
  return out;
}

void sgd_step(ParamSet& params, const GradMap& grads, double lr, double weight_decay) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("sgd_step: weight_decay must be >= 0");
  for (auto& [name, entry] : params.entries()) {
    if (!entry.trainable) continue;
    auto it = grads.find(name);
    if (it == grads.end()) {
      throw std::invalid_argument("sgd_step: missing gradient for trainable parameter " + name);
    }
    const Tensor& g = it->second;
    if (!g.same_shape(entry.value)) {
      throw std::invalid_argument("sgd_step: gradient shape " + g.shape_str() +
                                  " does not match parameter " + name + " " +
                                  entry.value.shape_str());
    }
    Tensor& p = entry.value;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      p[i] -= lr * (g[i] + weight_decay * p[i]);
    }
  }
}

}  // namespace intele
