#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eca/model.hpp"

namespace eca {

enum class FactorKind { Bernoulli, Rademacher, Uniform, Gaussian, Exponential };

/// One latent factor's marginal law with closed-form central moments.
/// Uniform is on [0, 1]; Gaussian and Exponential have unit scale.
struct FactorDistribution {
  FactorKind kind = FactorKind::Gaussian;
  double p = 0.5;  // Bernoulli success probability

  static FactorDistribution bernoulli(double p) { return {FactorKind::Bernoulli, p}; }
  static FactorDistribution rademacher() { return {FactorKind::Rademacher, 0.5}; }

  double mean() const;
  FactorMoments central_moments() const;
  double sample(Rng& rng) const;
};

std::string factor_kind_name(FactorKind k);
FactorKind parse_factor_kind(const std::string& s);

/// FactorSpec (with means) for a product of the given marginals.
FactorSpec factor_spec(const std::vector<FactorDistribution>& factors);

Vector sample_dirichlet(const DirichletParams& p, Rng& rng);

/// Each document draws h ~ Dir(alpha), then doc_len tokens by picking a topic
/// from h and a word from that topic's column. Documents keep token order.
/// Shards of documents use seeds derived from (seed, shard).
Corpus generate_lda_corpus(const TopicMatrix& o, const DirichletParams& p, std::size_t n_docs,
                           std::int64_t doc_len, std::uint64_t seed, int threads = 1);

enum class NoiseModel { Gaussian, Poisson };

struct FactorSamples {
  Matrix hidden;              // k x n
  std::vector<Matrix> views;  // each d x n
};

/// x_v = O h + noise for each view, h drawn once per sample. Gaussian noise has
/// standard deviation noise_sigma; Poisson draws counts with rate O h and
/// throws NegativeRate when a rate is negative.
FactorSamples generate_independent_factor_samples(const TopicMatrix& o,
                                                  const std::vector<FactorDistribution>& factors,
                                                  NoiseModel noise, double noise_sigma,
                                                  std::size_t n, int views, std::uint64_t seed);

/// Three views with their own conditional-mean matrices and one shared h.
FactorSamples generate_multiview(const TopicMatrix& o1, const TopicMatrix& o2, const TopicMatrix& o3,
                                 const std::vector<FactorDistribution>& factors, std::size_t n,
                                 double noise_sigma, std::uint64_t seed);

/// Row-stochastic 2x2 transition over the states {-1, +1} (index 0 is -1).
using Transition2 = std::array<std::array<double, 2>, 2>;

/// Three steps of a factorial HMM with +-1 factors, viewed from the middle
/// state h2: E[x_t | h2] = O_t h2 + shift_t. The chain starts stationary, and
/// the returned samples already have shift_t subtracted.
struct FactorialHmmEmbedding {
  TopicMatrix o1, o2, o3;
  Vector shift1, shift2, shift3;
  /// Law of h2: independent +-1 factors under the stationary distributions.
  FactorSpec h2;
  Matrix emission;
  std::vector<Transition2> transitions;
  std::vector<double> stationary_plus;  // P(h = +1) per factor

  FactorSamples sample(std::size_t n, double noise_sigma, std::uint64_t seed) const;
};

/// Throws InvalidTransition on a malformed transition or a chain whose
/// stationary law is a point mass.
FactorialHmmEmbedding embed_factorial_hmm(const std::vector<Transition2>& transitions,
                                          const Matrix& emission);

/// Columns drawn from a symmetric Dirichlet(concentration) on the d-simplex,
/// redrawn until full column rank.
TopicMatrix random_topic_matrix(Eigen::Index d, Eigen::Index k, double concentration,
                                std::uint64_t seed);

/// Gaussian d x k matrix, redrawn until sigma_k / sigma_1 >= min_ratio.
TopicMatrix random_factor_matrix(Eigen::Index d, Eigen::Index k, double min_ratio,
                                 std::uint64_t seed);

enum class GeneratorModel { Lda, GaussianHypercube, Poisson, MultiView, FactorialHmm };

std::string generator_model_name(GeneratorModel m);
GeneratorModel parse_generator_model(const std::string& s);

/// Generator settings. Unset matrices are drawn from `seed`.
struct GeneratorSpec {
  GeneratorModel model = GeneratorModel::Lda;
  Eigen::Index d = 50;
  Eigen::Index k = 5;
  Matrix o;  // d x k, optional
  std::vector<double> alpha;  // LDA; empty means all ones
  double topic_concentration = 0.1;
  std::int64_t doc_len = 3;
  std::size_t n = 10000;
  std::vector<FactorDistribution> factors;  // empty means Bernoulli(0.25)
  double noise_sigma = 0.1;
  double flip_probability = 0.1;  // factorial HMM, symmetric chains
  std::uint64_t seed = 0;

  /// Ground-truth topic matrix: `o` if given, else drawn from the seed.
  TopicMatrix topics() const;
  DirichletParams dirichlet() const;
  std::vector<FactorDistribution> factor_list() const;
};

/// LDA corpus with n documents for spec.model == Lda.
Corpus generate_corpus(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace eca
