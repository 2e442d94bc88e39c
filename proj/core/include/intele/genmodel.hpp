#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "intele/rng.hpp"

namespace intele::gen {

// Gaussian latent family: two sufficient statistics (z, z^2) per dimension.
inline constexpr std::size_t kStatsPerDim = 2;

// Per-class, per-dimension Gaussian latent prior p(z|y), carried in moment
// form (mean, variance) with the natural parameterization derived on demand:
//   gamma = (mean/var, -1/(2 var)),  T(z) = (z, z^2),
//   B(z) = -log(2 pi)/2,             A = mean^2/(2 var) + log(var)/2.
struct ExpFamilySpec {
  std::size_t d_z = 0;
  std::vector<std::vector<double>> mean;  // [m][d_z]
  std::vector<std::vector<double>> var;   // [m][d_z], strictly positive

  std::size_t num_classes() const { return mean.size(); }
  void validate() const;

  std::array<double, kStatsPerDim> natural(std::size_t y, std::size_t dim) const;
  double log_normalizer(std::size_t y, std::size_t dim) const;

  double log_density_moment(std::size_t y, const std::vector<double>& z) const;
  double log_density_natural(std::size_t y, const std::vector<double>& z) const;
};

// Fixed (non-trainable) two-layer leaky-ReLU map R^{d_z} -> R^{d_x} with
// full-column-rank weights, so it is injective. Deterministic.
struct MixingFunction {
  std::size_t d_z = 0, d_mid = 0, d_x = 0;
  double leak = 0.2;
  std::vector<double> w1;  // [d_mid x d_z], row-major
  std::vector<double> b1;  // [d_mid]
  std::vector<double> w2;  // [d_x x d_mid], row-major
  std::vector<double> b2;  // [d_x]

  // Draws weights from `seed` and verifies full column rank of both layers.
  static MixingFunction random(std::size_t d_z, std::size_t d_mid, std::size_t d_x,
                               std::uint64_t seed);
  void validate() const;

  std::vector<double> operator()(const std::vector<double>& z) const;
};

// Additive class-conditional patterns: a_0 = 0, and for every fake class
// k >= 1 a unit-norm vector made of a low-frequency sinusoid over the
// coordinate index plus one sharp spike.
struct ArtifactSpec {
  double kappa = 0.0;
  std::vector<std::vector<double>> pattern;  // [m][d_x]

  static ArtifactSpec make(std::size_t m, std::size_t d_x, double kappa);
  void validate() const;
};

enum class Regime { PL, PH };

struct GenModelParams {
  std::size_t m = 0, d_z = 0, d_x = 0;
  std::vector<double> prior;  // length m, sums to 1
  ExpFamilySpec family;
  MixingFunction mixing;
  ArtifactSpec artifact;
  double noise_scale = 0.0;  // s_x
  std::uint64_t seed = 1;

  void validate() const;
};

struct LabeledSample {
  std::vector<double> x;
  std::vector<double> z;  // exact latent behind x; oracle-only, never a feature
  int y = 0;
  int binary_label() const { return y == 0 ? 0 : 1; }
};

struct Dataset {
  std::size_t d_x = 0, d_z = 0;
  std::vector<LabeledSample> samples;
  std::size_t size() const { return samples.size(); }
};

std::vector<double> sample_z_given_y(const GenModelParams& params, int y, Rng& rng);

std::vector<double> mix(const GenModelParams& params, const std::vector<double>& z);

// PL: x = mix(z) + kappa * a_y + s_x * eps.  PH: the artifact term is omitted
// for every class. eps draws happen iff s_x > 0 and do not depend on regime,
// so matched rng states give matched noise across regimes.
std::vector<double> generate_x(const GenModelParams& params, const std::vector<double>& z,
                               int y, Rng& rng, Regime regime);

// n i.i.d. samples; sample i uses the substream derive(derive(seed, stream), i),
// so the result is independent of generation order or parallelism.
Dataset sample_dataset(const GenModelParams& params, std::size_t n, Regime regime,
                       std::uint64_t stream = 0);

// Posterior p(y|z) under the latent prior and class prior. Depends only on
// (prior, family): the regime never enters, which is the invariance the
// generative split is built around.
std::vector<double> bayes_posterior(const GenModelParams& params, const std::vector<double>& z);

struct CondBReport {
  bool satisfied = false;
  double condition_number = 0.0;
  std::size_t m_required = 0;
  std::string reason;
};

// Checks that the natural-parameter differences against class 0 span the
// full k_z * d_z dimensional statistic space (condition number < 1e8).
CondBReport check_condition_b(const ExpFamilySpec& spec);

}  // namespace intele::gen
