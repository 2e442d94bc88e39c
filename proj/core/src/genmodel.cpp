#include "intele/genmodel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace intele::gen {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Distinct substream tags so structural draws never collide with sampling.
constexpr std::uint64_t kMixW1 = 0x6d697857314d4958ULL;
constexpr std::uint64_t kMixW2 = 0x6d697857324d4958ULL;

}  // namespace

void ExpFamilySpec::validate() const {
  if (d_z == 0) throw std::invalid_argument("ExpFamilySpec: d_z must be positive");
  if (mean.empty() || mean.size() != var.size()) {
    throw std::invalid_argument("ExpFamilySpec: mean/var class counts disagree");
  }
  for (std::size_t y = 0; y < mean.size(); ++y) {
    if (mean[y].size() != d_z || var[y].size() != d_z) {
      throw std::invalid_argument("ExpFamilySpec: class " + std::to_string(y) +
                                  " parameter length != d_z");
    }
    for (std::size_t i = 0; i < d_z; ++i) {
      if (!(var[y][i] > 0.0)) {
        throw std::invalid_argument("ExpFamilySpec: variance must be > 0 (class " +
                                    std::to_string(y) + ", dim " + std::to_string(i) + ")");
      }
    }
  }
}

std::array<double, kStatsPerDim> ExpFamilySpec::natural(std::size_t y, std::size_t dim) const {
  const double mu = mean[y][dim], s2 = var[y][dim];
  return {mu / s2, -1.0 / (2.0 * s2)};
}

double ExpFamilySpec::log_normalizer(std::size_t y, std::size_t dim) const {
  const double mu = mean[y][dim], s2 = var[y][dim];
  return mu * mu / (2.0 * s2) + 0.5 * std::log(s2);
}

double ExpFamilySpec::log_density_moment(std::size_t y, const std::vector<double>& z) const {
  double lp = 0.0;
  for (std::size_t i = 0; i < d_z; ++i) {
    const double mu = mean[y][i], s2 = var[y][i];
    const double d = z[i] - mu;
    lp += -0.5 * (kLog2Pi + std::log(s2)) - d * d / (2.0 * s2);
  }
  return lp;
}

double ExpFamilySpec::log_density_natural(std::size_t y, const std::vector<double>& z) const {
  double lp = 0.0;
  for (std::size_t i = 0; i < d_z; ++i) {
    const auto g = natural(y, i);
    const double t1 = z[i], t2 = z[i] * z[i];
    lp += t1 * g[0] + t2 * g[1] - 0.5 * kLog2Pi - log_normalizer(y, i);
  }
  return lp;
}

MixingFunction MixingFunction::random(std::size_t d_z, std::size_t d_mid, std::size_t d_x,
                                      std::uint64_t seed) {
  if (!(d_z <= d_mid && d_mid <= d_x)) {
    throw std::invalid_argument("MixingFunction: need d_z <= d_mid <= d_x");
  }
  MixingFunction f;
  f.d_z = d_z;
  f.d_mid = d_mid;
  f.d_x = d_x;
  Rng r1(derive_seed(seed, kMixW1));
  f.w1.resize(d_mid * d_z);
  for (double& w : f.w1) w = r1.normal() / std::sqrt(static_cast<double>(d_z));
  f.b1.resize(d_mid);
  for (double& b : f.b1) b = r1.uniform(-0.5, 0.5);
  Rng r2(derive_seed(seed, kMixW2));
  f.w2.resize(d_x * d_mid);
  for (double& w : f.w2) w = r2.normal() / std::sqrt(static_cast<double>(d_mid));
  f.b2.resize(d_x);
  for (double& b : f.b2) b = r2.uniform(-0.5, 0.5);
  f.validate();
  return f;
}

void MixingFunction::validate() const {
  if (!(leak > 0.0 && leak < 1.0)) throw std::invalid_argument("MixingFunction: leak not in (0,1)");
  if (w1.size() != d_mid * d_z || w2.size() != d_x * d_mid || b1.size() != d_mid ||
      b2.size() != d_x) {
    throw std::invalid_argument("MixingFunction: weight sizes inconsistent with dims");
  }
  Eigen::MatrixXd W1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                      Eigen::RowMajor>>(w1.data(), d_mid, d_z);
  Eigen::MatrixXd W2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                      Eigen::RowMajor>>(w2.data(), d_x, d_mid);
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(W1).rank() != static_cast<Eigen::Index>(d_z)) {
    throw std::invalid_argument("MixingFunction: first layer is column-rank deficient");
  }
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(W2).rank() != static_cast<Eigen::Index>(d_mid)) {
    throw std::invalid_argument("MixingFunction: second layer is column-rank deficient");
  }
}

std::vector<double> MixingFunction::operator()(const std::vector<double>& z) const {
  if (z.size() != d_z) {
    throw std::invalid_argument("MixingFunction: latent length " + std::to_string(z.size()) +
                                " != d_z " + std::to_string(d_z));
  }
  std::vector<double> h(d_mid);
  for (std::size_t i = 0; i < d_mid; ++i) {
    double s = b1[i];
    for (std::size_t j = 0; j < d_z; ++j) s += w1[i * d_z + j] * z[j];
    h[i] = s >= 0.0 ? s : leak * s;
  }
  std::vector<double> x(d_x);
  for (std::size_t i = 0; i < d_x; ++i) {
    double s = b2[i];
    for (std::size_t j = 0; j < d_mid; ++j) s += w2[i * d_mid + j] * h[j];
    x[i] = s >= 0.0 ? s : leak * s;
  }
  return x;
}

ArtifactSpec ArtifactSpec::make(std::size_t m, std::size_t d_x, double kappa) {
  if (m == 0 || d_x == 0) throw std::invalid_argument("ArtifactSpec: empty class or data dim");
  if (kappa < 0.0) throw std::invalid_argument("ArtifactSpec: kappa must be >= 0");
  ArtifactSpec a;
  a.kappa = kappa;
  a.pattern.assign(m, std::vector<double>(d_x, 0.0));
  for (std::size_t k = 1; k < m; ++k) {
    auto& p = a.pattern[k];
    for (std::size_t j = 0; j < d_x; ++j) {
      p[j] = std::sin(kTwoPi * static_cast<double>(k) * static_cast<double>(j + 1) /
                          static_cast<double>(d_x) +
                      0.9 * static_cast<double>(k));
    }
    p[(7 * k) % d_x] += 3.0;  // the sharp localized spike, a boundary stand-in
    double norm = 0.0;
    for (double v : p) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : p) v /= norm;
  }
  return a;
}

void ArtifactSpec::validate() const {
  if (kappa < 0.0) throw std::invalid_argument("ArtifactSpec: kappa must be >= 0");
  if (pattern.empty()) throw std::invalid_argument("ArtifactSpec: no classes");
  for (double v : pattern[0]) {
    if (v != 0.0) throw std::invalid_argument("ArtifactSpec: class-0 pattern must be zero");
  }
  for (std::size_t k = 1; k < pattern.size(); ++k) {
    double norm = 0.0;
    for (double v : pattern[k]) norm += v * v;
    if (std::abs(std::sqrt(norm) - 1.0) > 1e-9) {
      throw std::invalid_argument("ArtifactSpec: pattern " + std::to_string(k) +
                                  " is not unit norm");
    }
  }
}

void GenModelParams::validate() const {
  if (m < 2) throw std::invalid_argument("GenModelParams: need at least 2 classes");
  if (prior.size() != m) throw std::invalid_argument("GenModelParams: prior length != m");
  double s = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw std::invalid_argument("GenModelParams: negative prior entry");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("GenModelParams: prior must sum to 1");
  family.validate();
  if (family.num_classes() != m || family.d_z != d_z) {
    throw std::invalid_argument("GenModelParams: family dims disagree with (m, d_z)");
  }
  mixing.validate();
  if (mixing.d_z != d_z || mixing.d_x != d_x) {
    throw std::invalid_argument("GenModelParams: mixing dims disagree with (d_z, d_x)");
  }
  artifact.validate();
  if (artifact.pattern.size() != m || artifact.pattern[0].size() != d_x) {
    throw std::invalid_argument("GenModelParams: artifact dims disagree with (m, d_x)");
  }
  if (noise_scale < 0.0) throw std::invalid_argument("GenModelParams: noise scale must be >= 0");
}

std::vector<double> sample_z_given_y(const GenModelParams& params, int y, Rng& rng) {
  if (y < 0 || static_cast<std::size_t>(y) >= params.m) {
    throw std::invalid_argument("sample_z_given_y: class out of range");
  }
  std::vector<double> z(params.d_z);
  for (std::size_t i = 0; i < params.d_z; ++i) {
    z[i] = rng.normal(params.family.mean[y][i], std::sqrt(params.family.var[y][i]));
  }
  return z;
}

std::vector<double> mix(const GenModelParams& params, const std::vector<double>& z) {
  return params.mixing(z);
}

std::vector<double> generate_x(const GenModelParams& params, const std::vector<double>& z,
                               int y, Rng& rng, Regime regime) {
  if (y < 0 || static_cast<std::size_t>(y) >= params.m) {
    throw std::invalid_argument("generate_x: class out of range");
  }
  std::vector<double> x = params.mixing(z);
  if (regime == Regime::PL) {
    const auto& a = params.artifact.pattern[static_cast<std::size_t>(y)];
    for (std::size_t j = 0; j < params.d_x; ++j) x[j] += params.artifact.kappa * a[j];
  }
  if (params.noise_scale > 0.0) {
    for (std::size_t j = 0; j < params.d_x; ++j) x[j] += params.noise_scale * rng.normal();
  }
  return x;
}

Dataset sample_dataset(const GenModelParams& params, std::size_t n, Regime regime,
                       std::uint64_t stream) {
  if (n == 0) throw std::invalid_argument("sample_dataset: n must be positive");
  params.validate();
  const std::uint64_t base = derive_seed(params.seed, stream);
  Dataset out;
  out.d_x = params.d_x;
  out.d_z = params.d_z;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(base, i));
    const double u = rng.uniform();
    int y = 0;
    double acc = 0.0;
    for (std::size_t c = 0; c < params.m; ++c) {
      acc += params.prior[c];
      if (u < acc) {
        y = static_cast<int>(c);
        break;
      }
      y = static_cast<int>(params.m - 1);  // guard against rounding at u ~ 1
    }
    LabeledSample& s = out.samples[i];
    s.y = y;
    s.z = sample_z_given_y(params, y, rng);
    s.x = generate_x(params, s.z, y, rng, regime);
  }
  return out;
}

std::vector<double> bayes_posterior(const GenModelParams& params, const std::vector<double>& z) {
  std::vector<double> logp(params.m);
  for (std::size_t y = 0; y < params.m; ++y) {
    const double pi = params.prior[y];
    logp[y] = (pi > 0.0 ? std::log(pi) : -std::numeric_limits<double>::infinity()) +
              params.family.log_density_moment(y, z);
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double denom = 0.0;
  for (double& v : logp) {
    v = std::exp(v - mx);
    denom += v;
  }
  for (double& v : logp) v /= denom;
  return logp;
}

CondBReport check_condition_b(const ExpFamilySpec& spec) {
  spec.validate();
  CondBReport rep;
  const std::size_t dim = kStatsPerDim * spec.d_z;
  rep.m_required = dim + 1;
  const std::size_t m = spec.num_classes();
  if (m < rep.m_required) {
    rep.satisfied = false;
    rep.reason = "insufficient classes";
    return rep;
  }
  // Columns are flattened natural-parameter differences against class 0;
  // flattening order is (dim 0 linear, dim 0 quadratic, dim 1 linear, ...).
  Eigen::MatrixXd D(dim, m - 1);
  for (std::size_t y = 1; y < m; ++y) {
    for (std::size_t i = 0; i < spec.d_z; ++i) {
      const auto gy = spec.natural(y, i);
      const auto g0 = spec.natural(0, i);
      D(static_cast<Eigen::Index>(kStatsPerDim * i), static_cast<Eigen::Index>(y - 1)) =
          gy[0] - g0[0];
      D(static_cast<Eigen::Index>(kStatsPerDim * i + 1), static_cast<Eigen::Index>(y - 1)) =
          gy[1] - g0[1];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(static_cast<Eigen::Index>(dim) - 1);
  rep.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  rep.satisfied = smin > 0.0 && rep.condition_number < 1e8;
  if (!rep.satisfied) rep.reason = "natural-parameter differences are numerically singular";
  return rep;
}

}  // namespace intele::gen
