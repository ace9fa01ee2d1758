#include <doctest.h>

#include "eca/algorithms.hpp"
#include "eca/error.hpp"
#include "eca/eval.hpp"
#include "eca/synthetic.hpp"
#include "support.hpp"

using namespace eca;
using test::max_abs;

TEST_CASE("skew ECA recovers canonical columns from exact moments") {
  std::vector<FactorDistribution> laws;
  for (double p : {0.1, 0.2, 0.3, 0.15}) laws.push_back(FactorDistribution::bernoulli(p));
  const FactorSpec f = factor_spec(laws);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TopicMatrix o = random_factor_matrix(12, 4, 0.1, derive_seed(41, seed));
    EcaOptions opts;
    opts.seed = seed;
    const RecoveryResult r = eca_skew(exact_moments(o, f), 4, opts);
    REQUIRE(r.status == RecoveryStatus::Complete);
    const EvalReport rep = align_columns(canonicalize(o, f), r.columns, false);
    CHECK(rep.max_l2 < 1e-9);
    // Skewness estimates are mu3 / sigma^3 of the matched factor, negated when
    // the canonical sign convention flipped its column.
    for (std::size_t j = 0; j < r.columns.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(rep.permutation[j]);
      Eigen::Index top;
      o.entries().col(i).cwiseAbs().maxCoeff(&top);
      const double sign = o.entries()(top, i) > 0 ? 1.0 : -1.0;
      CHECK(r.skewness_estimates[j] == doctest::Approx(sign * f.skewness(i)).epsilon(1e-8));
    }
  }
}

TEST_CASE("a supplied direction is used as given") {
  std::vector<FactorDistribution> laws(2, FactorDistribution::bernoulli(0.2));
  laws[1] = FactorDistribution::bernoulli(0.4);
  const FactorSpec f = factor_spec(laws);
  Matrix om(3, 2);
  om << 1, 0, 0, 1, 1, 1;
  const TopicMatrix o = make_topic_matrix(om);
  EcaOptions opts;
  Vector theta(2);
  theta << 0.6, 0.8;
  opts.theta = theta;
  const RecoveryResult r = eca_skew(exact_moments(o, f), 2, opts);
  CHECK(r.status == RecoveryStatus::Complete);
  CHECK(max_abs(r.theta_used - theta) == 0.0);
  CHECK(r.diagnostics.theta_attempts == 1);
}

TEST_CASE("a tied direction without retries leaves columns unrecovered") {
  // Equal skewness and theta halfway between the two whitened factor
  // directions: the two singular values coincide. The whitening below is the
  // one the algorithm builds for seed 0.
  const std::vector<FactorDistribution> laws(2, FactorDistribution::bernoulli(0.2));
  const FactorSpec f = factor_spec(laws);
  const TopicMatrix o = make_topic_matrix(Matrix::Identity(2, 2));
  const MomentSet m = exact_moments(o, f);
  const WhiteningMap white = whiten(m.pairs, randomized_range(m.pairs, 2, derive_seed(0, 0)));
  const Matrix mu = white.w.transpose() * canonicalize(o, f).entries();
  EcaOptions opts;
  const Vector theta = (mu.col(0) + mu.col(1)).normalized();
  opts.theta = theta;
  opts.theta_retries = 1;
  const RecoveryResult r = eca_skew(exact_moments(o, f), 2, opts);
  CHECK(r.status == RecoveryStatus::NotAllRecovered);
  CHECK(r.columns.empty());

  opts.theta_retries = 5;
  const RecoveryResult retried = eca_skew(exact_moments(o, f), 2, opts);
  CHECK(retried.status == RecoveryStatus::Complete);
}

TEST_CASE("symmetric factors are invisible to the skew variant but not to kurtosis") {
  const std::vector<FactorDistribution> laws(3, FactorDistribution::rademacher());
  const FactorSpec f = factor_spec(laws);
  const TopicMatrix o = random_factor_matrix(8, 3, 0.1, 42);
  const MomentSet m = exact_moments(o, f);
  const RecoveryResult skew = eca_skew(m, 3);
  CHECK(skew.columns.empty());
  CHECK(skew.status == RecoveryStatus::NotAllRecovered);
  const RecoveryResult kurt = eca_kurtosis(m, 3);
  REQUIRE(kurt.status == RecoveryStatus::Complete);
  CHECK(align_columns(canonicalize(o, f), kurt.columns, false).max_l2 < 1e-9);
  for (double k4 : kurt.kurtosis_estimates) CHECK(k4 == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("kurtosis ECA needs fourth moments") {
  const std::vector<FactorDistribution> laws(2, FactorDistribution::rademacher());
  MomentSet m = exact_moments(random_factor_matrix(4, 2, 0.1, 1), factor_spec(laws));
  m.quad = nullptr;
  CHECK_THROWS_AS(eca_kurtosis(m, 2), Error);
}

TEST_CASE("LDA recovery with alpha from exact moments") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TopicMatrix o = random_topic_matrix(15, 4, 0.5, derive_seed(43, seed));
    Vector alpha(4);
    alpha << 0.1, 0.4, 0.7, 1.3;
    const RecoveryResult r = eca_lda(exact_lda_moments(o, DirichletParams(alpha)), 4, alpha.sum(),
                                     EcaOptions{std::nullopt, std::nullopt, seed});
    REQUIRE(r.status == RecoveryStatus::Complete);
    const EvalReport rep = align_columns(o, r.columns, false);
    CHECK(rep.max_l2 < 1e-9);
    REQUIRE(r.alpha_hat.has_value());
    CHECK(aligned_alpha_error(alpha, *r.alpha_hat, rep.permutation) < 1e-8);
    for (const auto& c : r.columns) CHECK(c.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("recover_alpha inverts the modified pairs") {
  const TopicMatrix o = random_topic_matrix(7, 3, 1.0, 44);
  Vector alpha(3);
  alpha << 0.3, 0.5, 2.0;
  const double a0 = alpha.sum();
  const Matrix pairs = o.entries() * alpha.asDiagonal() * o.entries().transpose() / ((a0 + 1) * a0);
  CHECK(max_abs(recover_alpha(o.entries(), pairs, a0) - alpha) < 1e-12);
  CHECK_THROWS_AS(recover_alpha(o.entries(), pairs, -1.0), Error);
}

TEST_CASE("skew ECA from sampled moments approaches the truth") {
  const std::vector<FactorDistribution> laws = {FactorDistribution::bernoulli(0.1),
                                                FactorDistribution::bernoulli(0.3)};
  const TopicMatrix o = random_factor_matrix(5, 2, 0.3, 45);
  const FactorSamples s =
      generate_independent_factor_samples(o, laws, NoiseModel::Gaussian, 0.1, 200000, 3, 46);
  const RecoveryResult r = eca_skew(sample_moments(s.views), 2);
  REQUIRE(r.status == RecoveryStatus::Complete);
  CHECK(align_columns(canonicalize(o, factor_spec(laws)), r.columns, false).max_l2 < 0.05);
}

TEST_CASE("multi-view symmetrization recovers the third view") {
  std::vector<FactorDistribution> laws;
  for (double p : {0.1, 0.25, 0.35}) laws.push_back(FactorDistribution::bernoulli(p));
  const FactorSpec f = factor_spec(laws);
  const TopicMatrix o1 = random_factor_matrix(6, 3, 0.1, 47);
  const TopicMatrix o2 = random_factor_matrix(7, 3, 0.1, 48);
  const TopicMatrix o3 = random_factor_matrix(5, 3, 0.1, 49);
  const MultiViewMoments mv = exact_multiview_moments(o1, o2, o3, f);
  const Projectors ab = find_projectors_ab(mv.p12, mv.p21, 3, 50);
  CHECK(ab.a.rows() == 3);
  CHECK(ab.b.cols() == 7);
  const MomentSet sym = multiview_symmetrize(mv, ab);
  CHECK(max_abs(sym.pairs - exact_pairs(o3, f)) < 1e-10);
  const RecoveryResult r = eca_multiview(mv, 3);
  REQUIRE(r.status == RecoveryStatus::Complete);
  CHECK(align_columns(canonicalize(o3, f), r.columns, false).max_l2 < 1e-9);
}

TEST_CASE("multi-view projection fails on rank-deficient cross moments") {
  const Matrix zero = Matrix::Zero(4, 4);
  try {
    find_projectors_ab(zero, zero, 2, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::SingularProjection || e.code() == ErrorCode::RankCollapse));
  }
}
