#include "eca/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eca/error.hpp"

namespace eca {

std::size_t SvdExtraction::unique_count() const {
  return static_cast<std::size_t>(std::count(unique.begin(), unique.end(), true));
}

namespace {

Matrix apply_columns(const MatrixAction& a, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = a(x.col(j));
  return out;
}

WhiteningMap finish_whitening(Matrix u, Matrix v, const Matrix& whitened_pairs_check) {
  WhiteningMap map;
  map.u = std::move(u);
  map.v = std::move(v);
  map.w = map.u * map.v;
  map.w_pinv = left_pseudo_inverse(map.w);
  const Eigen::Index k = map.w.cols();
  map.residual = spectral_norm(whitened_pairs_check - Matrix::Identity(k, k));
  return map;
}

WhiteningMap whiten_projected(const Matrix& u, const Matrix& projected) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(projected));
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda(lambda.size() - 1);
  if (!(lmax > 0.0) || lambda(0) <= 1e-12 * lmax)
    fail(ErrorCode::SingularProjectedPairs,
         "U^T Pairs U is not positive definite (smallest eigenvalue " + std::to_string(lambda(0)) +
             ", largest " + std::to_string(lmax) + ")");
  Matrix v = eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  return {Matrix(u), std::move(v), Matrix(), Matrix(), 0.0};
}

void assign_uniqueness(SvdExtraction& out, double gap_tol, double zero_floor) {
  const std::size_t n = out.values.size();
  out.unique.assign(n, false);
  if (n == 0) return;
  const double smax = *std::max_element(out.values.begin(), out.values.end());
  out.gap_tolerance = std::max(gap_tol * smax, zero_floor);
  if (smax <= zero_floor) return;
  for (std::size_t i = 0; i < n; ++i) {
    bool isolated = true;
    for (std::size_t j = 0; j < n && isolated; ++j)
      if (j != i && std::abs(out.values[i] - out.values[j]) <= out.gap_tolerance) isolated = false;
    out.unique[i] = isolated;
  }
}

}  // namespace

Matrix randomized_range(const MatrixAction& pairs, Eigen::Index d, Eigen::Index k,
                        std::uint64_t seed, double rank_tol) {
  if (k < 1 || k > d) fail(ErrorCode::DimensionMismatch, "randomized_range needs 1 <= k <= d");
  Rng rng(seed);
  Matrix theta = random_gaussian(d, k, rng);
  Matrix y = apply_columns(pairs, theta);
  Eigen::ColPivHouseholderQR<Matrix> qr(y);
  const auto r = qr.matrixR().topLeftCorner(k, k).diagonal().cwiseAbs();
  const double rmax = r.maxCoeff();
  if (!(rmax > 0.0) || r(k - 1) <= rank_tol * rmax)
    fail(ErrorCode::RankCollapse, "Pairs Theta has numerical rank below k=" + std::to_string(k));
  return qr.householderQ() * Matrix::Identity(d, k);
}

Matrix randomized_range(const Matrix& pairs, Eigen::Index k, std::uint64_t seed, double rank_tol) {
  return randomized_range([&pairs](const Vector& v) -> Vector { return pairs * v; }, pairs.rows(), k,
                          seed, rank_tol);
}

WhiteningMap whiten(const Matrix& pairs, const Matrix& u) {
  if (pairs.rows() != u.rows() || pairs.cols() != pairs.rows())
    fail(ErrorCode::DimensionMismatch, "whiten: Pairs and U disagree on d");
  WhiteningMap partial = whiten_projected(u, u.transpose() * pairs * u);
  Matrix w = partial.u * partial.v;
  return finish_whitening(std::move(partial.u), std::move(partial.v), w.transpose() * pairs * w);
}

WhiteningMap whiten(const MatrixAction& pairs, const Matrix& u) {
  Matrix pu = apply_columns(pairs, u);
  WhiteningMap partial = whiten_projected(u, u.transpose() * pu);
  Matrix w = partial.u * partial.v;
  Matrix check = w.transpose() * apply_columns(pairs, w);
  return finish_whitening(std::move(partial.u), std::move(partial.v), check);
}

namespace {

// Top-k (by magnitude) eigenpairs of a symmetric matrix -> A Sigma^{-1/2}.
WhiteningMap whiten_from_eigs(const Matrix& basis, const Vector& lambda, Eigen::Index k,
                              double rank_tol, const MatrixAction& pairs) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lambda.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(lambda(a)) > std::abs(lambda(b));
  });
  Matrix a(basis.rows(), k);
  Vector sigma(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a.col(i) = basis.col(order[static_cast<std::size_t>(i)]);
    sigma(i) = std::abs(lambda(order[static_cast<std::size_t>(i)]));
  }
  if (!(sigma(0) > 0.0) || sigma(k - 1) <= rank_tol * sigma(0))
    fail(ErrorCode::InsufficientRank, "estimated Pairs has fewer than k=" + std::to_string(k) +
                                          " significant singular values");
  Matrix v = sigma.cwiseSqrt().cwiseInverse().asDiagonal();
  Matrix w = a * v;
  Matrix check = w.transpose() * apply_columns(pairs, w);
  return finish_whitening(std::move(a), std::move(v), check);
}

}  // namespace

WhiteningMap truncated_whiten(const Matrix& pairs_hat, Eigen::Index k, double rank_tol) {
  if (pairs_hat.rows() != pairs_hat.cols())
    fail(ErrorCode::DimensionMismatch, "truncated_whiten: Pairs must be square");
  if (k < 1 || k > pairs_hat.rows())
    fail(ErrorCode::InsufficientRank, "truncated_whiten needs 1 <= k <= d");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(pairs_hat));
  return whiten_from_eigs(eig.eigenvectors(), eig.eigenvalues(), k, rank_tol,
                          [&pairs_hat](const Vector& x) -> Vector { return pairs_hat * x; });
}

WhiteningMap truncated_whiten(const MatrixAction& pairs_hat, Eigen::Index d, Eigen::Index k,
                              std::uint64_t seed, int oversample, int power_iters,
                              double rank_tol) {
  if (k < 1 || k > d) fail(ErrorCode::InsufficientRank, "truncated_whiten needs 1 <= k <= d");
  const Eigen::Index l = std::min<Eigen::Index>(d, k + oversample);
  Rng rng(seed);
  Matrix q = orthonormalize(apply_columns(pairs_hat, random_gaussian(d, l, rng)));
  for (int it = 0; it < power_iters; ++it) q = orthonormalize(apply_columns(pairs_hat, q));
  // Rayleigh-Ritz on the captured subspace.
  Matrix small = symmetrized(q.transpose() * apply_columns(pairs_hat, q));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(small);
  return whiten_from_eigs(q * eig.eigenvectors(), eig.eigenvalues(), k, rank_tol, pairs_hat);
}

SvdExtraction unique_singular_vectors(const Matrix& t, double gap_tol, double zero_floor) {
  if (t.rows() != t.cols()) fail(ErrorCode::DimensionMismatch, "expected a square k x k operator");
  SvdExtraction out;
  if (t.size() == 0) return out;
  if (!t.allFinite()) {
    out.values.assign(static_cast<std::size_t>(t.rows()), 0.0);
    out.vectors.assign(static_cast<std::size_t>(t.rows()), Vector::Zero(t.rows()));
    out.unique.assign(out.values.size(), false);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Vector v = svd.matrixU().col(i);
    fix_sign_largest_positive(v);
    out.vectors.push_back(std::move(v));
    out.values.push_back(s(i));
  }
  assign_uniqueness(out, gap_tol, zero_floor);
  return out;
}

SvdExtraction power_iteration_svd(const MatrixAction& action, Eigen::Index k, std::uint64_t seed,
                                  int max_iter, double conv_tol, double gap_tol,
                                  double zero_floor) {
  Rng rng(seed);
  Matrix v = orthonormalize(random_gaussian(k, k, rng));
  SvdExtraction out;
  out.converged = false;
  for (int it = 0; it < max_iter; ++it) {
    Matrix y(k, k);
    for (Eigen::Index i = 0; i < k; ++i) y.col(i) = action(v.col(i));
    if (!y.allFinite()) break;
    Matrix next = orthonormalize(y);
    double change = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      // |sin| of the angle, without the cancellation in sqrt(1 - cos^2).
      const double c = v.col(i).dot(next.col(i));
      change = std::max(change, (next.col(i) - c * v.col(i)).norm());
    }
    v = std::move(next);
    out.iterations = it + 1;
    if (change < conv_tol) {
      out.converged = true;
      break;
    }
  }
  std::vector<std::pair<double, Vector>> pairs;
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector vi = v.col(i);
    fix_sign_largest_positive(vi);
    pairs.emplace_back(std::abs(vi.dot(action(vi))), std::move(vi));
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (auto& [value, vec] : pairs) {
    out.values.push_back(value);
    out.vectors.push_back(std::move(vec));
  }
  assign_uniqueness(out, gap_tol, zero_floor);
  if (!out.converged) out.unique.assign(out.unique.size(), false);
  return out;
}

}  // namespace eca
