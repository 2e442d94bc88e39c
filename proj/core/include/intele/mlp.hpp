#pragma once

#include <cstdint>
#include <vector>

#include "intele/optim.hpp"
#include "intele/rng.hpp"
#include "intele/tape.hpp"

namespace intele {

enum class Act { LeakyRelu, Tanh };

// Fully-connected network description: in -> hidden... -> out, the given
// activation after every hidden layer, linear output.
struct MlpSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<std::size_t> hidden;
  Act act = Act::LeakyRelu;
  double leak = 0.01;

  std::size_t num_layers() const { return hidden.size() + 1; }
  std::vector<std::size_t> layer_dims() const;  // [in, hidden..., out]
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights and biases, drawn from
// `rng` layer by layer in a fixed order. Parameter names: w0,b0,w1,b1,...
ParamSet mlp_init(const MlpSpec& spec, Rng& rng);

// Forward pass on a tape; x is [n x in], result [n x out].
Var mlp_forward(const MlpSpec& spec, Binding& bind, Var x);

// Forward pass without a tape, for prediction/evaluation paths.
Tensor mlp_forward(const MlpSpec& spec, const ParamSet& params, const Tensor& x);

}  // namespace intele
