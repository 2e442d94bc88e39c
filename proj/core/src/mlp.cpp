#include "intele/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace intele {

std::vector<std::size_t> MlpSpec::layer_dims() const {
  std::vector<std::size_t> dims;
  dims.push_back(in);
  for (std::size_t h : hidden) dims.push_back(h);
  dims.push_back(out);
  return dims;
}

ParamSet mlp_init(const MlpSpec& spec, Rng& rng) {
  if (spec.in == 0 || spec.out == 0) throw std::invalid_argument("mlp_init: zero layer width");
  ParamSet params;
  const auto dims = spec.layer_dims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w({fan_in, fan_out});
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
    Tensor b({1, fan_out});
    for (std::size_t i = 0; i < b.numel(); ++i) b[i] = rng.uniform(-bound, bound);
    params.add("w" + std::to_string(l), std::move(w));
    params.add("b" + std::to_string(l), std::move(b));
  }
  return params;
}

Var mlp_forward(const MlpSpec& spec, Binding& bind, Var x) {
  const std::size_t layers = spec.num_layers();
  Var h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Var w = bind("w" + std::to_string(l));
    Var b = bind("b" + std::to_string(l));
    h = add_rowvec(matmul(h, w), b);
    if (l + 1 < layers) {
      h = spec.act == Act::LeakyRelu ? leaky_relu(h, spec.leak) : tanh(h);
    }
  }
  return h;
}

Tensor mlp_forward(const MlpSpec& spec, const ParamSet& params, const Tensor& x) {
  const std::size_t layers = spec.num_layers();
  Tensor h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = params.at("w" + std::to_string(l));
    const Tensor& b = params.at("b" + std::to_string(l));
    if (h.cols() != w.rows()) {
      throw std::invalid_argument("mlp_forward: input width " + std::to_string(h.cols()) +
                                  " does not match layer " + std::to_string(l) + " " +
                                  w.shape_str());
    }
    const std::size_t m = h.rows(), k = w.rows(), n = w.cols();
    Tensor next({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double hip = h[i * k + p];
        for (std::size_t j = 0; j < n; ++j) next[i * n + j] += hip * w[p * n + j];
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[i * n + j] += b[j];
    }
    if (l + 1 < layers) {
      for (std::size_t i = 0; i < next.numel(); ++i) {
        if (spec.act == Act::LeakyRelu) {
          if (next[i] < 0.0) next[i] *= spec.leak;
        } else {
          next[i] = std::tanh(next[i]);
        }
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace intele
