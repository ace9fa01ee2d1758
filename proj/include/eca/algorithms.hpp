#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "eca/model.hpp"
#include "eca/moments.hpp"
#include "eca/spectral.hpp"

namespace eca {

struct EcaOptions {
  /// Projection direction for the first attempt; drawn from `seed` when unset.
  std::optional<Vector> theta;
  /// Second direction for the kurtotic variant.
  std::optional<Vector> theta2;
  std::uint64_t seed = 0;
  /// Attempts with fresh directions until k unique vectors are found. Vectors
  /// flagged unique in any attempt are pooled and deduplicated.
  int theta_retries = 5;
  double gap_tol = kDefaultGapTol;
  /// LDA only: divide each column by its entry sum (otherwise canonical form).
  bool normalize = true;
};

/// Skewed independent factors: whiten Pairs, SVD W^T Triples(W theta) W and map
/// unique singular vectors back through (W^+)^T. Columns come out in canonical
/// form with the largest-magnitude entry positive.
RecoveryResult eca_skew(const MomentSet& moments, Eigen::Index k, const EcaOptions& opts = {});

/// Kurtotic independent factors: as eca_skew, diagonalizing
/// W^T Quad(W theta, W theta') W.
RecoveryResult eca_kurtosis(const MomentSet& moments, Eigen::Index k, const EcaOptions& opts = {});

/// LDA from raw (non-central) moments and the Dirichlet concentration alpha0.
/// Columns are normalized by their entry sums (sign chosen so the sum is
/// positive); columns whose sum vanishes are dropped and counted.
/// `scale_estimates` holds each canonical column's entry sum, and `alpha_hat`
/// is filled when all k columns are found and alpha0 > 0.
RecoveryResult eca_lda(const MomentSet& raw, Eigen::Index k, double alpha0,
                       const EcaOptions& opts = {});

/// alpha0 (alpha0 + 1) O^+ Pairs_{alpha0} (O^+)^T 1.
Vector recover_alpha(const Matrix& o_hat, const Matrix& pairs_alpha0, double alpha0);

/// lambda^T W^T Triples(W lambda) W lambda.
double estimate_skewness(const WhiteningMap& w, const MomentSet& moments, const Vector& lambda);
/// lambda^T W^T Quad(W lambda, W lambda) W lambda.
double estimate_kurtosis(const WhiteningMap& w, const MomentSet& moments, const Vector& lambda);

/// Cross moments of three views sharing one latent vector h:
/// pairs_vw = E[(x_v - mu_v)(x_w - mu_w)^T] and
/// triples_132(eta) = E[(x1 - mu1)(x2 - mu2)^T <eta, x3 - mu3>] (d1 x d2).
struct MultiViewMoments {
  Eigen::Index d1 = 0, d2 = 0, d3 = 0;
  Matrix p12, p13, p21, p23, p31, p32;
  std::function<Matrix(const Vector&)> triples_132;
};

MultiViewMoments exact_multiview_moments(const TopicMatrix& o1, const TopicMatrix& o2,
                                         const TopicMatrix& o3, const FactorSpec& f);
/// Central cross moments of dense samples (each view d_v x n).
MultiViewMoments sample_multiview_moments(const Matrix& x1, const Matrix& x2, const Matrix& x3);

struct Projectors {
  Matrix a;  // k x d1
  Matrix b;  // k x d2
};

/// A = orth(Pairs_12 Theta)^T, B = orth(Pairs_21 Theta')^T for seeded Gaussian
/// Theta, Theta'. Resamples while cond(A Pairs_12 B^T) > max_condition and
/// throws SingularProjection after max_attempts.
Projectors find_projectors_ab(const Matrix& pairs12, const Matrix& pairs21, Eigen::Index k,
                              std::uint64_t seed, int max_attempts = 5,
                              double max_condition = 1e10);

/// Reduce to the third view: Pairs_3 and Triples_3(eta) as a central MomentSet
/// over R^{d3}.
MomentSet multiview_symmetrize(const MultiViewMoments& mv, const Projectors& ab,
                               double max_condition = 1e10);

/// Recovers canonical columns of O_3.
RecoveryResult eca_multiview(const MultiViewMoments& mv, Eigen::Index k, const EcaOptions& opts = {});

}  // namespace eca
