#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eca/linalg.hpp"

namespace eca {

/// v -> A v for a symmetric operator that need not be materialized.
using MatrixAction = std::function<Vector(const Vector&)>;

/// W = U V whitens Pairs: W^T Pairs W = I_k. `residual` is the spectral norm
/// of W^T Pairs W - I_k measured at construction.
struct WhiteningMap {
  Matrix u;
  Matrix v;
  Matrix w;
  Matrix w_pinv;  // (W^T W)^{-1} W^T
  double residual = 0.0;

  Eigen::Index d() const { return w.rows(); }
  Eigen::Index k() const { return w.cols(); }
  /// (W^+)^T lambda: maps a whitened direction back to observation space.
  Vector reconstruct(const Vector& lambda) const { return w_pinv.transpose() * lambda; }
};

struct SvdExtraction {
  std::vector<Vector> vectors;  // orthonormal, largest-magnitude entry positive
  std::vector<double> values;   // descending
  std::vector<bool> unique;
  double gap_tolerance = 0.0;   // absolute threshold actually applied
  bool converged = true;
  int iterations = 0;

  std::size_t unique_count() const;
};

inline constexpr double kDefaultGapTol = 1e-6;
/// Whitened operators whose singular values all sit below this are treated as
/// identically zero (nothing is separable).
inline constexpr double kZeroSpectrumFloor = 1e-10;

/// U = orth(Pairs Theta) with Theta a seeded d x k standard normal matrix.
/// Throws RankCollapse when Pairs Theta has numerical rank below k.
Matrix randomized_range(const MatrixAction& pairs, Eigen::Index d, Eigen::Index k,
                        std::uint64_t seed, double rank_tol = 1e-10);
Matrix randomized_range(const Matrix& pairs, Eigen::Index k, std::uint64_t seed,
                        double rank_tol = 1e-10);

/// V from the symmetric eigendecomposition of U^T Pairs U. Throws
/// SingularProjectedPairs if an eigenvalue is <= 1e-12 lambda_max.
WhiteningMap whiten(const Matrix& pairs, const Matrix& u);
WhiteningMap whiten(const MatrixAction& pairs, const Matrix& u);

/// W = A Sigma^{-1/2} from the top-k singular pairs of a symmetric estimate.
/// Throws InsufficientRank when sigma_k <= rank_tol * sigma_1.
WhiteningMap truncated_whiten(const Matrix& pairs_hat, Eigen::Index k, double rank_tol = 1e-12);
/// Matrix-free variant via seeded randomized subspace iteration.
WhiteningMap truncated_whiten(const MatrixAction& pairs_hat, Eigen::Index d, Eigen::Index k,
                              std::uint64_t seed, int oversample = 10, int power_iters = 6,
                              double rank_tol = 1e-12);

/// Full SVD of T; value i is unique iff |s_i - s_j| > max(gap_tol s_max, floor)
/// for every j != i.
SvdExtraction unique_singular_vectors(const Matrix& t, double gap_tol = kDefaultGapTol,
                                      double zero_floor = kZeroSpectrumFloor);

/// Orthogonal power iteration. `action` maps an iterate to its image; it may
/// depend on the iterate itself (v -> T(v) v), as in the tensor variant used by
/// the LDA pipeline. Convergence is declared when every vector's change
/// (sine of the angle to its predecessor) falls below conv_tol.
SvdExtraction power_iteration_svd(const MatrixAction& action, Eigen::Index k, std::uint64_t seed,
                                  int max_iter = 1000, double conv_tol = 1e-10,
                                  double gap_tol = kDefaultGapTol,
                                  double zero_floor = kZeroSpectrumFloor);

}  // namespace eca
