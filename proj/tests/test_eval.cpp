#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "eca/error.hpp"
#include "eca/eval.hpp"
#include "eca/moments.hpp"
#include "eca/synthetic.hpp"
#include "support.hpp"

using namespace eca;

namespace {

std::vector<Vector> columns_of(const Matrix& m) {
  std::vector<Vector> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.emplace_back(m.col(j));
  return out;
}

}  // namespace

TEST_CASE("alignment undoes a column shuffle") {
  Rng rng(91);
  const Matrix truth = random_gaussian(6, 4, rng);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  std::vector<Vector> est;
  for (auto p : perm) est.emplace_back(truth.col(static_cast<Eigen::Index>(p)));
  const EvalReport r = align_columns(truth, est, false);
  CHECK(r.permutation == perm);
  CHECK(r.max_l2 == 0.0);
  CHECK(r.missing == 0);
}

TEST_CASE("signs are only forgiven when allowed") {
  Rng rng(92);
  const Matrix truth = random_gaussian(5, 3, rng);
  std::vector<Vector> est = columns_of(truth);
  est[1] = -est[1];
  const EvalReport signed_ok = align_columns(truth, est, true);
  CHECK(signed_ok.max_l2 == 0.0);
  CHECK(signed_ok.sign_flips == std::vector<bool>{false, true, false});
  const EvalReport strict = align_columns(truth, est, false);
  CHECK(strict.max_l2 > 0.0);
}

TEST_CASE("assignment is optimal, not greedy") {
  // Greedy takes the 1 and is then forced into the 100.
  Matrix cost(2, 2);
  cost << 1, 2, 2, 100;
  CHECK(solve_assignment(cost) == std::vector<std::size_t>{1, 0});

  Rng rng(93);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix c(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) c(i) = unif(rng);
    std::vector<std::size_t> p = {0, 1, 2};
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0;
      for (std::size_t i = 0; i < 3; ++i) total += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p[i]));
      best = std::min(best, total);
    } while (std::next_permutation(p.begin(), p.end()));
    const auto a = solve_assignment(c);
    double got = 0;
    for (std::size_t i = 0; i < 3; ++i) got += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a[i]));
    CHECK(got == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("missing columns are counted and make the aligned error infinite") {
  const Matrix truth = Matrix::Identity(4, 3);
  const EvalReport r = align_columns(truth, {truth.col(2)}, false);
  CHECK(r.missing == 2);
  CHECK(r.permutation == std::vector<std::size_t>{2});
  CHECK(r.max_l2 == 0.0);
  CHECK(std::isinf(aligned_max_error(r)));
  CHECK_THROWS_AS(align_columns(truth, columns_of(Matrix::Identity(4, 4)), false), Error);
  CHECK_THROWS_AS(align_columns(truth, {Vector::Ones(3)}, false), Error);
}

TEST_CASE("l1 columns and alpha alignment") {
  Matrix truth(2, 2);
  truth << 1, 0, 0, 1;
  Vector off(2);
  off << 0.9, 0.1;
  const EvalReport r = align_columns(truth, {Vector(truth.col(1)), off}, false, ColumnNorm::L1);
  CHECK(r.permutation == std::vector<std::size_t>{1, 0});
  CHECK(r.per_column_l1[1] == doctest::Approx(0.2));
  CHECK(r.per_column_l2[1] == doctest::Approx(std::sqrt(0.02)));
  Vector a(2), ah(2);
  a << 0.3, 0.7;
  ah << 0.75, 0.25;
  CHECK(aligned_alpha_error(a, ah, r.permutation) == doctest::Approx(0.05));
}

TEST_CASE("moment errors") {
  const TopicMatrix o = random_topic_matrix(6, 2, 1.0, 94);
  const MomentSet truth = exact_lda_moments(o, DirichletParams(Vector::Ones(2)));
  const auto probes = default_probe_etas(truth, 2, 95);
  CHECK(probes.size() == 22);
  for (const auto& p : probes) CHECK(p.norm() == doctest::Approx(1.0));

  const MomentErrors same = moment_errors(truth, truth, probes);
  CHECK(same.pairs == 0.0);
  CHECK(same.triples == 0.0);

  MomentSet bumped = truth;
  Rng rng(96);
  const Vector u = random_unit_vector(6, rng);
  bumped.pairs += 1e-3 * u * u.transpose();
  CHECK(moment_errors(truth, bumped, probes).pairs == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("empirical pairs error is within the concentration bound") {
  const TopicMatrix o = random_topic_matrix(10, 3, 1.0, 97);
  const DirichletParams p(Vector::Ones(3));
  const std::size_t n = 10000;
  const MomentSet emp = finalize(accumulate(generate_lda_corpus(o, p, n, 3, 98), MomentOptions{}));
  const MomentSet truth = exact_lda_moments(o, p);
  const double bound = 3.0 * (1.0 + std::sqrt(std::log(3.0))) / std::sqrt(static_cast<double>(n));
  CHECK(moment_errors(truth, emp, default_probe_etas(truth, 3, 99)).pairs <= bound);
}

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> v = {4, 1, 3, 2};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({7}, 0.3) == 7.0);
}

TEST_CASE("sweep slope") {
  const std::vector<std::size_t> ns = {100, 1000, 10000};
  SUBCASE("constant errors have zero slope") {
    const SweepResult r = sample_complexity_sweep(ns, 5, [](std::size_t, std::size_t, std::uint64_t) { return 0.3; }, 1);
    CHECK(r.slope == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::exp(r.intercept) == doctest::Approx(0.3));
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].errors.size() == 5);
  }
  SUBCASE("inverse square root errors have slope minus one half") {
    const SweepResult r = sample_complexity_sweep(
        ns, 3, [](std::size_t n, std::size_t, std::uint64_t) { return 2.0 / std::sqrt(static_cast<double>(n)); }, 1);
    CHECK(r.slope == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("trial seeds do not depend on the thread count") {
    const TrialFunction seed_as_error = [](std::size_t, std::size_t, std::uint64_t s) {
      return static_cast<double>(s % 1000) + 1.0;
    };
    const SweepResult a = sample_complexity_sweep(ns, 7, seed_as_error, 2, 1);
    const SweepResult b = sample_complexity_sweep(ns, 7, seed_as_error, 2, 4);
    for (std::size_t i = 0; i < ns.size(); ++i) CHECK(a.rows[i].errors == b.rows[i].errors);
  }
}
