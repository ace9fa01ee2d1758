#include "eca/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eca/error.hpp"

namespace eca {

namespace {

constexpr double kDedupCos = 1.0 - 1e-6;

using WhitenedOperator =
    std::function<Matrix(const Matrix& w, const Vector& theta, const Vector& theta2)>;

struct Diagonalization {
  WhiteningMap white;
  std::vector<Vector> lambdas;
  std::vector<double> values;
  double min_gap = std::numeric_limits<double>::infinity();
  Vector theta_used;
  int attempts = 0;
};

Vector direction(const std::optional<Vector>& given, int attempt, Eigen::Index k,
                 std::uint64_t seed, std::uint64_t stream) {
  if (attempt == 0 && given) {
    if (given->size() != k) fail(ErrorCode::DimensionMismatch, "theta must have length k");
    return *given;
  }
  Rng rng(derive_seed(seed, stream + static_cast<std::uint64_t>(attempt)));
  return random_unit_vector(k, rng);
}

Diagonalization diagonalize(const Matrix& pairs, Eigen::Index k, const EcaOptions& opts,
                            const WhitenedOperator& op) {
  if (k < 1 || k > pairs.rows())
    fail(ErrorCode::DimensionMismatch, "need 1 <= k <= d, got k=" + std::to_string(k));
  Diagonalization out;
  Matrix u = randomized_range(pairs, k, derive_seed(opts.seed, 0));
  out.white = whiten(pairs, u);

  const int attempts = std::max(1, opts.theta_retries);
  std::vector<std::pair<double, Vector>> accepted;
  for (int r = 0; r < attempts; ++r) {
    Vector theta = direction(opts.theta, r, k, opts.seed, 100);
    Vector theta2 = direction(opts.theta2, r, k, opts.seed, 10000);
    if (r == 0) out.theta_used = theta;
    out.attempts = r + 1;
    SvdExtraction ext = unique_singular_vectors(op(out.white.w, theta, theta2), opts.gap_tol);
    for (std::size_t i = 0; i < ext.vectors.size(); ++i) {
      if (!ext.unique[i]) continue;
      const Vector& lam = ext.vectors[i];
      bool dup = std::any_of(accepted.begin(), accepted.end(), [&](const auto& a) {
        return std::abs(a.second.dot(lam)) > kDedupCos;
      });
      if (dup) continue;
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < ext.values.size(); ++j)
        if (j != i) gap = std::min(gap, std::abs(ext.values[i] - ext.values[j]));
      if (ext.values.size() == 1) gap = ext.values[0];
      out.min_gap = std::min(out.min_gap, gap);
      accepted.emplace_back(ext.values[i], lam);
    }
    if (static_cast<Eigen::Index>(accepted.size()) >= k) break;
  }
  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (auto& [value, lam] : accepted) {
    out.values.push_back(value);
    out.lambdas.push_back(std::move(lam));
  }
  if (accepted.empty()) out.min_gap = 0.0;
  return out;
}

void finish_status(RecoveryResult& res, Eigen::Index k) {
  res.status = static_cast<Eigen::Index>(res.columns.size()) == k ? RecoveryStatus::Complete
                                                                  : RecoveryStatus::NotAllRecovered;
  res.diagnostics.unreliable.assign(res.columns.size(), false);
}

void check_pairs(const MomentSet& moments) {
  if (moments.pairs.rows() == 0 || moments.pairs.rows() != moments.pairs.cols())
    fail(ErrorCode::DimensionMismatch, "moment set has no square Pairs matrix");
}

}  // namespace

RecoveryResult eca_skew(const MomentSet& moments, Eigen::Index k, const EcaOptions& opts) {
  check_pairs(moments);
  WhitenedOperator op = [&](const Matrix& w, const Vector& theta, const Vector&) -> Matrix {
    return w.transpose() * moments.triples_contract(w * theta) * w;
  };
  Diagonalization diag = diagonalize(moments.pairs, k, opts, op);

  RecoveryResult res;
  res.theta_used = diag.theta_used;
  res.diagnostics.whitening_residual = diag.white.residual;
  res.diagnostics.min_singular_gap = diag.min_gap;
  res.diagnostics.theta_attempts = diag.attempts;
  for (std::size_t i = 0; i < diag.lambdas.size(); ++i) {
    Vector lam = diag.lambdas[i];
    Vector col = diag.white.reconstruct(lam);
    Eigen::Index idx = 0;
    col.cwiseAbs().maxCoeff(&idx);
    if (col(idx) < 0) {
      col = -col;
      lam = -lam;
    }
    res.columns.push_back(std::move(col));
    res.singular_values.push_back(diag.values[i]);
    res.skewness_estimates.push_back(estimate_skewness(diag.white, moments, lam));
  }
  finish_status(res, k);
  return res;
}

RecoveryResult eca_kurtosis(const MomentSet& moments, Eigen::Index k, const EcaOptions& opts) {
  check_pairs(moments);
  if (!moments.has_quad())
    fail(ErrorCode::InvalidOptions, "kurtotic ECA needs a fourth-moment contraction");
  WhitenedOperator op = [&](const Matrix& w, const Vector& theta, const Vector& theta2) -> Matrix {
    return w.transpose() * moments.quad_contract(w * theta, w * theta2) * w;
  };
  Diagonalization diag = diagonalize(moments.pairs, k, opts, op);

  RecoveryResult res;
  res.theta_used = diag.theta_used;
  res.diagnostics.whitening_residual = diag.white.residual;
  res.diagnostics.min_singular_gap = diag.min_gap;
  res.diagnostics.theta_attempts = diag.attempts;
  for (std::size_t i = 0; i < diag.lambdas.size(); ++i) {
    Vector lam = diag.lambdas[i];
    Vector col = diag.white.reconstruct(lam);
    fix_sign_largest_positive(col);
    res.columns.push_back(std::move(col));
    res.singular_values.push_back(diag.values[i]);
    res.kurtosis_estimates.push_back(estimate_kurtosis(diag.white, moments, lam));
  }
  finish_status(res, k);
  return res;
}

RecoveryResult eca_lda(const MomentSet& raw, Eigen::Index k, double alpha0, const EcaOptions& opts) {
  check_pairs(raw);
  if (alpha0 < 0.0) fail(ErrorCode::NegativeAlpha0, "alpha0 must be >= 0");
  const MomentSet modified =
      raw.kind == MomentKind::DirichletModified ? raw : modified_moments(raw, alpha0);
  WhitenedOperator op = [&](const Matrix& w, const Vector& theta, const Vector&) -> Matrix {
    return w.transpose() * modified.triples_contract(w * theta) * w;
  };
  Diagonalization diag = diagonalize(modified.pairs, k, opts, op);

  RecoveryResult res;
  res.theta_used = diag.theta_used;
  res.diagnostics.whitening_residual = diag.white.residual;
  res.diagnostics.min_singular_gap = diag.min_gap;
  res.diagnostics.theta_attempts = diag.attempts;
  for (std::size_t i = 0; i < diag.lambdas.size(); ++i) {
    Vector lam = diag.lambdas[i];
    Vector col = diag.white.reconstruct(lam);
    double sum = col.sum();
    if (std::abs(sum) <= 1e-8 * col.lpNorm<1>()) {
      ++res.diagnostics.dropped_columns;
      continue;
    }
    if (sum < 0) {
      col = -col;
      lam = -lam;
      sum = -sum;
    }
    res.skewness_estimates.push_back(estimate_skewness(diag.white, modified, lam));
    res.scale_estimates.push_back(sum);
    res.singular_values.push_back(diag.values[i]);
    res.columns.push_back(opts.normalize ? Vector(col / sum) : col);
  }
  finish_status(res, k);
  if (res.status == RecoveryStatus::Complete && alpha0 > 0.0) {
    Matrix normalized = res.columns_matrix();
    if (!opts.normalize)
      for (Eigen::Index j = 0; j < normalized.cols(); ++j)
        normalized.col(j) /= res.scale_estimates[static_cast<std::size_t>(j)];
    res.alpha_hat = recover_alpha(normalized, modified.pairs, alpha0);
  }
  return res;
}

Vector recover_alpha(const Matrix& o_hat, const Matrix& pairs_alpha0, double alpha0) {
  if (alpha0 < 0.0) fail(ErrorCode::NegativeAlpha0, "alpha0 must be >= 0");
  if (pairs_alpha0.rows() != o_hat.rows() || pairs_alpha0.cols() != o_hat.rows())
    fail(ErrorCode::DimensionMismatch, "recover_alpha: Pairs and O disagree on d");
  // Validates full column rank.
  make_topic_matrix(o_hat, TopicMode::Raw);
  const Matrix pinv = left_pseudo_inverse(o_hat);
  return alpha0 * (alpha0 + 1.0) * (pinv * pairs_alpha0 * pinv.transpose()) *
         Vector::Ones(o_hat.cols());
}

double estimate_skewness(const WhiteningMap& w, const MomentSet& moments, const Vector& lambda) {
  const Vector wl = w.w * lambda;
  return wl.dot(moments.triples_contract(wl) * wl);
}

double estimate_kurtosis(const WhiteningMap& w, const MomentSet& moments, const Vector& lambda) {
  const Vector wl = w.w * lambda;
  return wl.dot(moments.quad_contract(wl, wl) * wl);
}

MultiViewMoments exact_multiview_moments(const TopicMatrix& o1, const TopicMatrix& o2,
                                         const TopicMatrix& o3, const FactorSpec& f) {
  const auto k = static_cast<Eigen::Index>(f.k());
  if (o1.k() != k || o2.k() != k || o3.k() != k)
    fail(ErrorCode::DimensionMismatch, "all views need k columns");
  const Matrix m1 = o1.entries(), m2 = o2.entries(), m3 = o3.entries();
  const Vector var = f.variances();
  const Vector mu3 = f.third_moments();
  auto cross = [&](const Matrix& a, const Matrix& b) -> Matrix {
    return a * var.asDiagonal() * b.transpose();
  };
  MultiViewMoments mv;
  mv.d1 = m1.rows();
  mv.d2 = m2.rows();
  mv.d3 = m3.rows();
  mv.p12 = cross(m1, m2);
  mv.p13 = cross(m1, m3);
  mv.p21 = cross(m2, m1);
  mv.p23 = cross(m2, m3);
  mv.p31 = cross(m3, m1);
  mv.p32 = cross(m3, m2);
  mv.triples_132 = [m1, m2, m3, mu3](const Vector& eta) -> Matrix {
    if (eta.size() != m3.rows()) fail(ErrorCode::DimensionMismatch, "eta must live in view 3");
    Vector w = (m3.transpose() * eta).cwiseProduct(mu3);
    return m1 * w.asDiagonal() * m2.transpose();
  };
  return mv;
}

MultiViewMoments sample_multiview_moments(const Matrix& x1, const Matrix& x2, const Matrix& x3) {
  const Eigen::Index n = x1.cols();
  if (n == 0 || x2.cols() != n || x3.cols() != n)
    fail(ErrorCode::DimensionMismatch, "views need the same (nonzero) number of samples");
  auto c1 = std::make_shared<Matrix>(x1.colwise() - x1.rowwise().mean());
  auto c2 = std::make_shared<Matrix>(x2.colwise() - x2.rowwise().mean());
  auto c3 = std::make_shared<Matrix>(x3.colwise() - x3.rowwise().mean());
  const double inv_n = 1.0 / static_cast<double>(n);
  MultiViewMoments mv;
  mv.d1 = x1.rows();
  mv.d2 = x2.rows();
  mv.d3 = x3.rows();
  mv.p12 = *c1 * c2->transpose() * inv_n;
  mv.p13 = *c1 * c3->transpose() * inv_n;
  mv.p23 = *c2 * c3->transpose() * inv_n;
  mv.p21 = mv.p12.transpose();
  mv.p31 = mv.p13.transpose();
  mv.p32 = mv.p23.transpose();
  mv.triples_132 = [c1, c2, c3, inv_n](const Vector& eta) -> Matrix {
    if (eta.size() != c3->rows()) fail(ErrorCode::DimensionMismatch, "eta must live in view 3");
    Vector w = c3->transpose() * eta;
    return *c1 * w.asDiagonal() * c2->transpose() * inv_n;
  };
  return mv;
}

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace

Projectors find_projectors_ab(const Matrix& pairs12, const Matrix& pairs21, Eigen::Index k,
                              std::uint64_t seed, int max_attempts, double max_condition) {
  if (pairs21.rows() != pairs12.cols() || pairs21.cols() != pairs12.rows())
    fail(ErrorCode::DimensionMismatch, "Pairs_21 must have the transposed shape of Pairs_12");
  if (k < 1 || k > pairs12.rows() || k > pairs12.cols())
    fail(ErrorCode::DimensionMismatch, "need 1 <= k <= min(d1, d2)");
  double last_cond = 0.0;
  for (int attempt = 0; attempt < std::max(1, max_attempts); ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Matrix theta = random_gaussian(pairs12.cols(), k, rng);
    Matrix theta_prime = random_gaussian(pairs21.cols(), k, rng);
    Projectors ab;
    ab.a = orthonormalize(pairs12 * theta).transpose();
    ab.b = orthonormalize(pairs21 * theta_prime).transpose();
    last_cond = condition_number(ab.a * pairs12 * ab.b.transpose());
    if (last_cond <= max_condition) return ab;
  }
  fail(ErrorCode::SingularProjection,
       "A Pairs_12 B^T stayed ill-conditioned (condition number " + std::to_string(last_cond) + ")");
}

MomentSet multiview_symmetrize(const MultiViewMoments& mv, const Projectors& ab,
                               double max_condition) {
  const Matrix p12t = ab.a * mv.p12 * ab.b.transpose();  // k x k
  if (condition_number(p12t) > max_condition)
    fail(ErrorCode::SingularProjection, "A Pairs_12 B^T is not invertible");
  const Matrix p31t = mv.p31 * ab.a.transpose();  // d3 x k
  const Matrix p32t = mv.p32 * ab.b.transpose();  // d3 x k
  const Matrix p23t = ab.b * mv.p23;              // k x d3
  const Matrix p13t = ab.a * mv.p13;              // k x d3
  Eigen::PartialPivLU<Matrix> lu(p12t);
  Eigen::PartialPivLU<Matrix> lu_t(p12t.transpose());

  MomentSet ms;
  ms.pairs = symmetrized(p31t * lu_t.solve(p23t));
  ms.mean = Vector::Zero(mv.d3);
  const Matrix left = p32t * lu.inverse();    // d3 x k
  const Matrix right = lu.solve(p13t);        // k x d3
  const Matrix a = ab.a, b = ab.b;
  auto t132 = mv.triples_132;
  ms.triples = [left, right, a, b, t132](const Vector& eta) -> Matrix {
    return symmetrized(left * (a * t132(eta) * b.transpose()) * right);
  };
  ms.kind = MomentKind::Central;
  ms.provenance = Provenance::Analytic;
  return ms;
}

RecoveryResult eca_multiview(const MultiViewMoments& mv, Eigen::Index k, const EcaOptions& opts) {
  Projectors ab = find_projectors_ab(mv.p12, mv.p21, k, derive_seed(opts.seed, 0xAB));
  return eca_skew(multiview_symmetrize(mv, ab), k, opts);
}

}  // namespace eca
