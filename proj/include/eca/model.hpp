#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eca/linalg.hpp"

namespace eca {

enum class TopicMode { Canonical, ProbabilityColumns, Raw };

std::string topic_mode_name(TopicMode mode);

inline constexpr double kDefaultRankTol = 1e-10;

/// d x k matrix of conditional means E[x | h] = O h. Immutable; construct via
/// make_topic_matrix, which validates rank and column normalization.
class TopicMatrix {
 public:
  const Matrix& entries() const { return entries_; }
  TopicMode mode() const { return mode_; }
  Eigen::Index d() const { return entries_.rows(); }
  Eigen::Index k() const { return entries_.cols(); }
  Vector column(Eigen::Index i) const { return entries_.col(i); }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

 private:
  friend TopicMatrix make_topic_matrix(Matrix entries, TopicMode mode, double rank_tol);
  TopicMatrix(Matrix entries, TopicMode mode, double smin, double smax)
      : entries_(std::move(entries)), mode_(mode), sigma_min_(smin), sigma_max_(smax) {}

  Matrix entries_;
  TopicMode mode_;
  double sigma_min_;
  double sigma_max_;
};

TopicMatrix make_topic_matrix(Matrix entries, TopicMode mode = TopicMode::Raw,
                              double rank_tol = kDefaultRankTol);

/// Central moments of one latent factor.
struct FactorMoments {
  double variance = 1.0;
  double mu3 = 0.0;
  double mu4 = 3.0;
};

class FactorSpec {
 public:
  /// Rejects nonpositive variances and mu4 < variance^2.
  static FactorSpec from_moments(std::vector<FactorMoments> factors,
                                 std::optional<Vector> mean = std::nullopt);

  std::size_t k() const { return factors_.size(); }
  const FactorMoments& operator[](std::size_t i) const { return factors_[i]; }
  const std::vector<FactorMoments>& factors() const { return factors_; }
  const std::optional<Vector>& mean() const { return mean_; }

  double sigma(std::size_t i) const;
  double skewness(std::size_t i) const;
  double excess_kurtosis(std::size_t i) const;

  Vector variances() const;
  Vector third_moments() const;
  /// mu4 - 3 sigma^4 per factor.
  Vector fourth_cumulants() const;

 private:
  FactorSpec(std::vector<FactorMoments> f, std::optional<Vector> mean)
      : factors_(std::move(f)), mean_(std::move(mean)) {}
  std::vector<FactorMoments> factors_;
  std::optional<Vector> mean_;
};

class DirichletParams {
 public:
  explicit DirichletParams(Vector alpha);

  const Vector& alpha() const { return alpha_; }
  double alpha0() const { return alpha0_; }
  Eigen::Index k() const { return alpha_.size(); }
  /// min_i alpha_i / alpha0.
  double pmin() const { return alpha_.minCoeff() / alpha0_; }
  /// 2 sqrt(a0 (a0+1) / ((a0+2)^2 alpha_i)).
  double effective_skewness(Eigen::Index i) const;

 private:
  Vector alpha_;
  double alpha0_;
};

/// Sparse count vector plus, when known, the original token order.
struct Document {
  std::vector<std::int32_t> ids;     // strictly increasing
  std::vector<std::int32_t> counts;  // parallel to ids, each >= 1
  std::vector<std::int32_t> tokens;  // ordered tokens; empty when unknown
  std::int64_t length = 0;

  static Document from_tokens(std::vector<std::int32_t> tokens);
  /// Pairs may repeat ids; counts are summed.
  static Document from_counts(std::vector<std::pair<std::int32_t, std::int32_t>> id_counts);
};

struct Corpus {
  std::int32_t d = 0;
  std::vector<Document> documents;

  std::size_t n_docs() const { return documents.size(); }
  /// Throws IndexOutOfRange / CountNonPositive on a broken invariant.
  void validate() const;
};

enum class RecoveryStatus { Complete, NotAllRecovered };

struct RecoveryDiagnostics {
  double whitening_residual = 0.0;
  /// Smallest separation between accepted singular values and any other.
  double min_singular_gap = 0.0;
  int theta_attempts = 0;
  int dropped_columns = 0;
  std::vector<bool> unreliable;  // per returned column
  int power_iterations = 0;
  bool power_converged = true;
  std::size_t docs_used = 0;
  std::size_t docs_skipped = 0;
};

struct RecoveryResult {
  std::vector<Vector> columns;
  std::vector<double> singular_values;  // descending, paired with columns
  std::vector<double> skewness_estimates;
  std::vector<double> kurtosis_estimates;
  std::vector<double> scale_estimates;
  std::optional<Vector> alpha_hat;
  Vector theta_used;
  RecoveryStatus status = RecoveryStatus::Complete;
  RecoveryDiagnostics diagnostics;

  Matrix columns_matrix() const;
};

/// O diag(sigma_1, ..., sigma_k); mode becomes Canonical and each column is
/// flipped so its largest-magnitude entry is positive.
TopicMatrix canonicalize(const TopicMatrix& o, const FactorSpec& f);

/// Dirichlet canonical form O diag(sqrt(alpha_i)) / sqrt((a0+1) a0).
TopicMatrix canonicalize(const TopicMatrix& o, const DirichletParams& p);

}  // namespace eca
