#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "eca/model.hpp"
#include "eca/moments.hpp"

namespace eca {

enum class ColumnNorm { L2, L1 };

struct MomentErrors {
  double pairs = 0.0;    // spectral norm of the Pairs difference
  double triples = 0.0;  // max over probes of the contracted Triples difference
};

struct EvalReport {
  /// permutation[j] is the true column matched to recovered column j.
  std::vector<std::size_t> permutation;
  std::vector<bool> sign_flips;
  std::vector<double> per_column_l2;
  std::vector<double> per_column_l1;
  double max_l2 = 0.0;
  double mean_l2 = 0.0;
  /// True columns left without a recovered partner.
  std::size_t missing = 0;
  std::optional<double> alpha_error;
  std::optional<MomentErrors> moment_errors;
};

/// Minimum total cost assignment of recovered to true columns. The cost of a
/// pair is the chosen norm of the difference, after the better of the two
/// signs when allow_sign is set. Throws DimensionMismatch when more columns
/// are recovered than exist or lengths differ.
EvalReport align_columns(const Matrix& truth, const std::vector<Vector>& estimate, bool allow_sign,
                         ColumnNorm cost = ColumnNorm::L2);
EvalReport align_columns(const TopicMatrix& truth, const std::vector<Vector>& estimate,
                         bool allow_sign, ColumnNorm cost = ColumnNorm::L2);

/// Max |alpha_true[perm[j]] - alpha_hat[j]| over recovered columns.
double aligned_alpha_error(const Vector& alpha_true, const Vector& alpha_hat,
                           const std::vector<std::size_t>& permutation);

/// Square assignment problem; returns row -> column minimizing the total cost.
std::vector<std::size_t> solve_assignment(const Matrix& cost);

/// max_l2 of a report, or +infinity when a true column was not recovered.
double aligned_max_error(const EvalReport& r);

MomentErrors moment_errors(const MomentSet& truth, const MomentSet& estimate,
                           const std::vector<Vector>& probe_etas);

/// 20 seeded random unit vectors plus the k whitened singular directions of
/// the ground-truth moments, mapped back to R^d and normalized.
std::vector<Vector> default_probe_etas(const MomentSet& truth, Eigen::Index k, std::uint64_t seed);

struct SweepRow {
  std::size_t n = 0;
  std::vector<double> errors;  // one per trial, in trial order
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Least-squares fit of log(median) = intercept + slope log(N).
  double slope = 0.0;
  double intercept = 0.0;
};

/// error(N, trial index, trial seed) for one trial.
using TrialFunction = std::function<double(std::size_t, std::size_t, std::uint64_t)>;

/// Trials run concurrently with seeds derived from (seed, N index, trial).
SweepResult sample_complexity_sweep(const std::vector<std::size_t>& ns, std::size_t trials,
                                    const TrialFunction& trial, std::uint64_t seed, int threads = 1);

double quantile(std::vector<double> values, double q);
/// Returns {slope, intercept}.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eca
