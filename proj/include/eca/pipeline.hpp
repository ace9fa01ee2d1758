#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "eca/model.hpp"
#include "eca/moments.hpp"
#include "eca/spectral.hpp"

namespace eca {

enum class SvdMethod { Dense, PowerIteration };

struct FitOptions {
  Eigen::Index k = 1;
  double alpha0 = 0.0;
  std::uint64_t seed = 0;
  SvdMethod svd_method = SvdMethod::Dense;
  int theta_retries = 5;
  bool clip_normalize = false;
  double clip_fraction = 0.01;
  int max_iter = 1000;
  double conv_tol = 1e-10;
  TripleEstimator estimator_mode = TripleEstimator::AllDistinctTriples;
  int threads = 1;
  std::int64_t dense_pairs_cap = 20000;

  /// Throws InvalidOptions on k < 1, alpha0 < 0 or clip_fraction outside [0, 1).
  void validate() const;
};

std::string svd_method_name(SvdMethod m);
std::string estimator_name(TripleEstimator e);

/// Everything the pipeline needs from the data, in a form that is agnostic to
/// whether the moments came from a corpus or from closed forms.
struct LdaInputs {
  Eigen::Index d = 0;
  Vector mean;
  /// Dense raw Pairs when available; otherwise `pairs_action` is used.
  std::optional<Matrix> pairs;
  MatrixAction pairs_action;
  /// W -> k x k x k whitened raw third moment E[W^T x1 (x) W^T x2 (x) W^T x3].
  std::function<WhitenedThird(const Matrix&)> whitened_third;
  std::size_t docs_used = 0;
  std::size_t docs_skipped = 0;
};

LdaInputs inputs_from_corpus(const Corpus& corpus, const FitOptions& opts);
LdaInputs inputs_from_moments(const MomentSet& raw);

/// The whitened, Dirichlet-corrected third moment as a k x k operator family.
class WhitenedOperator {
 public:
  WhitenedOperator(WhitenedThird s, Vector m, Matrix g, double alpha0);
  Eigen::Index k() const { return s_.k; }
  /// W^T Triples_{alpha0}(W theta) W.
  Matrix operator()(const Vector& theta) const;
  /// v^T W^T Triples_{alpha0}(W v) W v.
  double cubic(const Vector& v) const;

 private:
  WhitenedThird s_;
  Vector m_;
  Matrix g_;
  double alpha0_;
};

/// Columns O_i = (W^+)^T v_i / Z_i with Z_i = 2 / ((alpha0 + 2) v_i^T T(v_i) v_i).
/// `scale_estimates` holds Z_i, `skewness_estimates` the cubic form, and
/// `alpha_hat` is (alpha0 + 1) alpha0 Z_i^2 when alpha0 > 0 and all k columns
/// were found.
RecoveryResult fit_lda(const LdaInputs& inputs, const FitOptions& opts);
RecoveryResult fit_lda(const Corpus& corpus, const FitOptions& opts);
/// Analytic (or any raw) moments pushed through the same code path.
RecoveryResult fit_lda(const MomentSet& raw, const FitOptions& opts);

/// Zero the smallest-magnitude entries while the removed mass stays within
/// clip_fraction of the l1 norm, zero the negatives, then normalize to sum 1.
/// Throws AllZeroAfterClip.
Vector clip_normalize(const Vector& column, double clip_fraction);

}  // namespace eca
