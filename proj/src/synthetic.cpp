#include "eca/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "eca/error.hpp"

namespace eca {

double FactorDistribution::mean() const {
  switch (kind) {
    case FactorKind::Bernoulli: return p;
    case FactorKind::Rademacher: return 0.0;
    case FactorKind::Uniform: return 0.5;
    case FactorKind::Gaussian: return 0.0;
    case FactorKind::Exponential: return 1.0;
  }
  return 0.0;
}

FactorMoments FactorDistribution::central_moments() const {
  switch (kind) {
    case FactorKind::Bernoulli: {
      const double pq = p * (1.0 - p);
      return {pq, pq * (1.0 - 2.0 * p), pq * (1.0 - 3.0 * pq)};
    }
    case FactorKind::Rademacher: return {1.0, 0.0, 1.0};
    case FactorKind::Uniform: return {1.0 / 12.0, 0.0, 1.0 / 80.0};
    case FactorKind::Gaussian: return {1.0, 0.0, 3.0};
    case FactorKind::Exponential: return {1.0, 2.0, 9.0};
  }
  return {};
}

double FactorDistribution::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind) {
    case FactorKind::Bernoulli: return unif(rng) < p ? 1.0 : 0.0;
    case FactorKind::Rademacher: return unif(rng) < 0.5 ? -1.0 : 1.0;
    case FactorKind::Uniform: return unif(rng);
    case FactorKind::Gaussian: return std::normal_distribution<double>(0.0, 1.0)(rng);
    case FactorKind::Exponential: return std::exponential_distribution<double>(1.0)(rng);
  }
  return 0.0;
}

std::string factor_kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::Bernoulli: return "bernoulli";
    case FactorKind::Rademacher: return "rademacher";
    case FactorKind::Uniform: return "uniform";
    case FactorKind::Gaussian: return "gaussian";
    case FactorKind::Exponential: return "exponential";
  }
  return "unknown";
}

FactorKind parse_factor_kind(const std::string& s) {
  for (FactorKind k : {FactorKind::Bernoulli, FactorKind::Rademacher, FactorKind::Uniform,
                       FactorKind::Gaussian, FactorKind::Exponential})
    if (factor_kind_name(k) == s) return k;
  fail(ErrorCode::InvalidOptions, "unknown factor distribution '" + s + "'");
}

FactorSpec factor_spec(const std::vector<FactorDistribution>& factors) {
  std::vector<FactorMoments> m;
  Vector mean(static_cast<Eigen::Index>(factors.size()));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].kind == FactorKind::Bernoulli && !(factors[i].p > 0.0 && factors[i].p < 1.0))
      fail(ErrorCode::InvalidFactor, "Bernoulli p must lie in (0, 1)");
    m.push_back(factors[i].central_moments());
    mean(static_cast<Eigen::Index>(i)) = factors[i].mean();
  }
  return FactorSpec::from_moments(std::move(m), mean);
}

Vector sample_dirichlet(const DirichletParams& p, Rng& rng) {
  const Eigen::Index k = p.k();
  if (k == 1) return Vector::Ones(1);
  // log Gamma(a) draws; for a < 1 use Gamma(a) = Gamma(a + 1) U^{1/a} so tiny
  // shapes do not underflow to exact zeros.
  Vector logg(k);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double a = p.alpha()(i);
    if (a < 1.0) {
      const double g = std::gamma_distribution<double>(a + 1.0, 1.0)(rng);
      double u = unif(rng);
      while (u <= 0.0) u = unif(rng);
      logg(i) = std::log(g) + std::log(u) / a;
    } else {
      logg(i) = std::log(std::gamma_distribution<double>(a, 1.0)(rng));
    }
  }
  const double top = logg.maxCoeff();
  Vector h = (logg.array() - top).exp().matrix();
  return h / h.sum();
}

namespace {

constexpr std::size_t kShardDocs = 1024;

template <typename F>
void for_each_shard(std::size_t n, std::size_t shard_size, int threads, F&& run) {
  const std::size_t shards = (n + shard_size - 1) / shard_size;
  if (threads > 1 && shards > 1) {
    std::vector<std::future<void>> futures;
    for (std::size_t s = 0; s < shards; ++s)
      futures.push_back(std::async(std::launch::async, [&run, s] { run(s); }));
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t s = 0; s < shards; ++s) run(s);
  }
}

}  // namespace

Corpus generate_lda_corpus(const TopicMatrix& o, const DirichletParams& p, std::size_t n_docs,
                           std::int64_t doc_len, std::uint64_t seed, int threads) {
  if (doc_len < 3) fail(ErrorCode::InvalidOptions, "doc_len must be >= 3");
  if (o.mode() != TopicMode::ProbabilityColumns)
    fail(ErrorCode::BadColumnNormalization, "LDA topics must be probability columns");
  if (o.k() != p.k()) fail(ErrorCode::DimensionMismatch, "topic matrix and alpha disagree on k");
  const Matrix& entries = o.entries();
  std::vector<std::discrete_distribution<std::int32_t>> words;
  for (Eigen::Index j = 0; j < o.k(); ++j)
    words.emplace_back(entries.col(j).data(), entries.col(j).data() + entries.rows());

  Corpus corpus;
  corpus.d = static_cast<std::int32_t>(o.d());
  corpus.documents.resize(n_docs);
  for_each_shard(n_docs, kShardDocs, threads, [&](std::size_t s) {
    Rng rng(derive_seed(seed, s));
    auto local_words = words;
    const std::size_t end = std::min(n_docs, (s + 1) * kShardDocs);
    for (std::size_t i = s * kShardDocs; i < end; ++i) {
      const Vector h = sample_dirichlet(p, rng);
      std::discrete_distribution<std::int32_t> topic(h.data(), h.data() + h.size());
      std::vector<std::int32_t> tokens(static_cast<std::size_t>(doc_len));
      for (auto& t : tokens) t = local_words[static_cast<std::size_t>(topic(rng))](rng);
      corpus.documents[i] = Document::from_tokens(std::move(tokens));
    }
  });
  return corpus;
}

namespace {

double draw_poisson(double rate, Rng& rng) {
  if (rate == 0.0) return 0.0;
  return static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
}

void check_factors(const std::vector<FactorDistribution>& factors, Eigen::Index k) {
  if (static_cast<Eigen::Index>(factors.size()) != k)
    fail(ErrorCode::DimensionMismatch, "need one factor distribution per column");
}

}  // namespace

FactorSamples generate_independent_factor_samples(const TopicMatrix& o,
                                                  const std::vector<FactorDistribution>& factors,
                                                  NoiseModel noise, double noise_sigma,
                                                  std::size_t n, int views, std::uint64_t seed) {
  if (views != 3 && views != 4) fail(ErrorCode::InvalidOptions, "views must be 3 or 4");
  check_factors(factors, o.k());
  if (noise == NoiseModel::Gaussian && !(noise_sigma >= 0.0))
    fail(ErrorCode::InvalidOptions, "noise_sigma must be >= 0");
  const Matrix& m = o.entries();
  const auto cols = static_cast<Eigen::Index>(n);
  FactorSamples out;
  out.hidden.resize(o.k(), cols);
  out.views.assign(static_cast<std::size_t>(views), Matrix(o.d(), cols));
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index s = 0; s < cols; ++s) {
    for (Eigen::Index i = 0; i < o.k(); ++i)
      out.hidden(i, s) = factors[static_cast<std::size_t>(i)].sample(rng);
    const Vector rate = m * out.hidden.col(s);
    if (noise == NoiseModel::Poisson && rate.minCoeff() < 0.0)
      fail(ErrorCode::NegativeRate, "Poisson rate O h is negative at sample " + std::to_string(s));
    for (auto& x : out.views)
      for (Eigen::Index j = 0; j < o.d(); ++j)
        x(j, s) = noise == NoiseModel::Poisson ? draw_poisson(rate(j), rng)
                                               : rate(j) + noise_sigma * gauss(rng);
  }
  return out;
}

FactorSamples generate_multiview(const TopicMatrix& o1, const TopicMatrix& o2, const TopicMatrix& o3,
                                 const std::vector<FactorDistribution>& factors, std::size_t n,
                                 double noise_sigma, std::uint64_t seed) {
  if (o1.k() != o2.k() || o1.k() != o3.k())
    fail(ErrorCode::DimensionMismatch, "all views need the same k");
  check_factors(factors, o1.k());
  const auto cols = static_cast<Eigen::Index>(n);
  FactorSamples out;
  out.hidden.resize(o1.k(), cols);
  const std::array<const TopicMatrix*, 3> os{&o1, &o2, &o3};
  for (const auto* o : os) out.views.emplace_back(o->d(), cols);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index s = 0; s < cols; ++s) {
    for (Eigen::Index i = 0; i < o1.k(); ++i)
      out.hidden(i, s) = factors[static_cast<std::size_t>(i)].sample(rng);
    for (std::size_t v = 0; v < 3; ++v) {
      Vector x = os[v]->entries() * out.hidden.col(s);
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += noise_sigma * gauss(rng);
      out.views[v].col(s) = x;
    }
  }
  return out;
}

namespace {

constexpr double kStochasticTol = 1e-12;

void check_transition(const Transition2& t) {
  for (const auto& row : t) {
    for (double v : row)
      if (!(v >= 0.0 && v <= 1.0))
        fail(ErrorCode::InvalidTransition, "transition probabilities must lie in [0, 1]");
    if (std::abs(row[0] + row[1] - 1.0) > kStochasticTol)
      fail(ErrorCode::InvalidTransition, "transition rows must sum to 1");
  }
}

// P(h = +1) under the stationary law; the uniform law when every law is.
double stationary_plus(const Transition2& t) {
  const double up = t[0][1];    // -1 -> +1
  const double down = t[1][0];  // +1 -> -1
  if (up + down == 0.0) return 0.5;
  return up / (up + down);
}

// E[next | current = s] = a + b s for a two-state chain with transition rows t.
std::pair<double, double> linear_conditional(const std::array<std::array<double, 2>, 2>& t) {
  const double at_minus = t[0][1] - t[0][0];
  const double at_plus = t[1][1] - t[1][0];
  return {0.5 * (at_plus + at_minus), 0.5 * (at_plus - at_minus)};
}

}  // namespace

FactorialHmmEmbedding embed_factorial_hmm(const std::vector<Transition2>& transitions,
                                          const Matrix& emission) {
  const auto k = static_cast<Eigen::Index>(transitions.size());
  if (k == 0 || emission.cols() != k)
    fail(ErrorCode::DimensionMismatch, "need one transition per emission column");
  Vector a1(k), b1(k), a3(k), b3(k);
  std::vector<FactorMoments> law;
  Vector mean(k);
  std::vector<double> pis;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Transition2& t = transitions[static_cast<std::size_t>(i)];
    check_transition(t);
    const double pi = stationary_plus(t);
    if (!(pi > 0.0 && pi < 1.0))
      fail(ErrorCode::InvalidTransition, "stationary law of factor " + std::to_string(i) +
                                             " is a point mass");
    pis.push_back(pi);
    const std::array<double, 2> stat{1.0 - pi, pi};
    // Reverse chain: P(h1 = r | h2 = s) = pi_r T(r, s) / pi_s.
    Transition2 rev{};
    for (int s = 0; s < 2; ++s)
      for (int r = 0; r < 2; ++r) rev[s][r] = stat[r] * t[r][s] / stat[s];
    std::tie(a3(i), b3(i)) = linear_conditional(t);
    std::tie(a1(i), b1(i)) = linear_conditional(rev);
    const double q = pi * (1.0 - pi);
    law.push_back({4.0 * q, 8.0 * q * (1.0 - 2.0 * pi), 16.0 * q * (1.0 - 3.0 * q)});
    mean(i) = 2.0 * pi - 1.0;
  }
  return FactorialHmmEmbedding{
      make_topic_matrix(emission * b1.asDiagonal()),
      make_topic_matrix(emission),
      make_topic_matrix(emission * b3.asDiagonal()),
      emission * a1,
      Vector::Zero(emission.rows()),
      emission * a3,
      FactorSpec::from_moments(std::move(law), mean),
      emission,
      transitions,
      pis};
}

FactorSamples FactorialHmmEmbedding::sample(std::size_t n, double noise_sigma,
                                            std::uint64_t seed) const {
  const Eigen::Index k = emission.cols();
  const auto cols = static_cast<Eigen::Index>(n);
  FactorSamples out;
  out.hidden.resize(k, cols);
  for (int v = 0; v < 3; ++v) out.views.emplace_back(emission.rows(), cols);
  const std::array<const Vector*, 3> shifts{&shift1, &shift2, &shift3};
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index s = 0; s < cols; ++s) {
    std::array<Vector, 3> h{Vector(k), Vector(k), Vector(k)};
    for (Eigen::Index i = 0; i < k; ++i) {
      const Transition2& t = transitions[static_cast<std::size_t>(i)];
      int state = unif(rng) < stationary_plus[static_cast<std::size_t>(i)] ? 1 : 0;
      for (int step = 0; step < 3; ++step) {
        if (step > 0) state = unif(rng) < t[state][1] ? 1 : 0;
        h[step](i) = state == 1 ? 1.0 : -1.0;
      }
    }
    out.hidden.col(s) = h[1];
    for (int v = 0; v < 3; ++v) {
      Vector x = emission * h[v] - *shifts[v];
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += noise_sigma * gauss(rng);
      out.views[v].col(s) = x;
    }
  }
  return out;
}

TopicMatrix random_topic_matrix(Eigen::Index d, Eigen::Index k, double concentration,
                                std::uint64_t seed) {
  if (!(concentration > 0.0)) fail(ErrorCode::InvalidDirichlet, "concentration must be > 0");
  const DirichletParams column_law(Vector::Constant(d, concentration));
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    Matrix m(d, k);
    for (Eigen::Index j = 0; j < k; ++j) m.col(j) = sample_dirichlet(column_law, rng);
    // Exact renormalization for the 1e-12 column-sum check.
    for (Eigen::Index j = 0; j < k; ++j) m.col(j) /= m.col(j).sum();
    try {
      return make_topic_matrix(std::move(m), TopicMode::ProbabilityColumns);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient || attempt > 100) throw;
    }
  }
}

TopicMatrix random_factor_matrix(Eigen::Index d, Eigen::Index k, double min_ratio,
                                 std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    Matrix m = random_gaussian(d, k, rng);
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    if (s(k - 1) >= min_ratio * s(0)) return make_topic_matrix(std::move(m));
    if (attempt > 1000)
      fail(ErrorCode::RankDeficient, "could not draw a matrix with the requested conditioning");
  }
}

std::string generator_model_name(GeneratorModel m) {
  switch (m) {
    case GeneratorModel::Lda: return "lda";
    case GeneratorModel::GaussianHypercube: return "independent-gaussian-hypercube";
    case GeneratorModel::Poisson: return "independent-poisson";
    case GeneratorModel::MultiView: return "multi-view";
    case GeneratorModel::FactorialHmm: return "factorial-hmm";
  }
  return "unknown";
}

GeneratorModel parse_generator_model(const std::string& s) {
  for (GeneratorModel m : {GeneratorModel::Lda, GeneratorModel::GaussianHypercube,
                           GeneratorModel::Poisson, GeneratorModel::MultiView,
                           GeneratorModel::FactorialHmm})
    if (generator_model_name(m) == s) return m;
  fail(ErrorCode::InvalidOptions, "unknown generator model '" + s + "'");
}

TopicMatrix GeneratorSpec::topics() const {
  if (o.size() > 0) {
    const bool probability = model == GeneratorModel::Lda;
    return make_topic_matrix(o, probability ? TopicMode::ProbabilityColumns : TopicMode::Raw);
  }
  if (model == GeneratorModel::Lda || model == GeneratorModel::Poisson)
    return random_topic_matrix(d, k, topic_concentration, derive_seed(seed, 0x70));
  return random_factor_matrix(d, k, 0.1, derive_seed(seed, 0x70));
}

DirichletParams GeneratorSpec::dirichlet() const {
  if (alpha.empty()) return DirichletParams(Vector::Ones(k));
  return DirichletParams(Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size())));
}

std::vector<FactorDistribution> GeneratorSpec::factor_list() const {
  if (!factors.empty()) return factors;
  return std::vector<FactorDistribution>(static_cast<std::size_t>(k), FactorDistribution::bernoulli(0.25));
}

Corpus generate_corpus(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.model != GeneratorModel::Lda)
    fail(ErrorCode::InvalidOptions, "only the LDA generator produces a corpus");
  return generate_lda_corpus(spec.topics(), spec.dirichlet(), spec.n, spec.doc_len, seed);
}

}  // namespace eca
