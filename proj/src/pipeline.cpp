#include <optional>
#include "eca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "eca/error.hpp"

namespace eca {

void FitOptions::validate() const {
  if (k < 1) fail(ErrorCode::InvalidOptions, "k must be >= 1");
  if (!(alpha0 >= 0.0)) fail(ErrorCode::NegativeAlpha0, "alpha0 must be >= 0");
  if (!(clip_fraction >= 0.0 && clip_fraction < 1.0))
    fail(ErrorCode::InvalidOptions, "clip_fraction must lie in [0, 1)");
  if (theta_retries < 1) fail(ErrorCode::InvalidOptions, "theta_retries must be >= 1");
  if (max_iter < 1) fail(ErrorCode::InvalidOptions, "max_iter must be >= 1");
  if (!(conv_tol > 0.0)) fail(ErrorCode::InvalidOptions, "conv_tol must be > 0");
}

std::string svd_method_name(SvdMethod m) {
  return m == SvdMethod::Dense ? "dense" : "power_iteration";
}

std::string estimator_name(TripleEstimator e) {
  return e == TripleEstimator::AllDistinctTriples ? "all-distinct-triples" : "first-three-tokens";
}

namespace {

MomentOptions moment_options(const FitOptions& opts, bool keep_documents) {
  MomentOptions m;
  m.estimator = opts.estimator_mode;
  m.seed = derive_seed(opts.seed, 0x7E);
  m.threads = opts.threads;
  m.dense_pairs_cap = opts.dense_pairs_cap;
  m.keep_documents = keep_documents;
  return m;
}

}  // namespace

LdaInputs inputs_from_corpus(const Corpus& corpus, const FitOptions& opts) {
  if (corpus.n_docs() == 0) fail(ErrorCode::EmptyCorpus, "corpus has no documents");
  corpus.validate();
  const bool dense = corpus.d <= opts.dense_pairs_cap;
  MomentAccumulator acc = accumulate(corpus, moment_options(opts, !dense));
  const double inv_n = 1.0 / static_cast<double>(acc.n_docs());

  LdaInputs in;
  in.d = corpus.d;
  in.mean = acc.mean_sum() * inv_n;
  in.docs_used = acc.n_docs();
  in.docs_skipped = acc.n_skipped();
  if (acc.has_dense_pairs()) {
    in.pairs = symmetrized(acc.pairs_sum() * inv_n);
    auto p = std::make_shared<Matrix>(*in.pairs);
    in.pairs_action = [p](const Vector& v) -> Vector { return *p * v; };
  } else {
    auto docs = std::make_shared<std::vector<CompactDoc>>(acc.documents());
    in.pairs_action = [docs, inv_n](const Vector& v) -> Vector {
      return pairs_apply(*docs, v) * inv_n;
    };
  }
  const MomentOptions second_pass = moment_options(opts, false);
  in.whitened_third = [&corpus, second_pass](const Matrix& w) {
    return accumulate_whitened_third(corpus, w, second_pass);
  };
  return in;
}

LdaInputs inputs_from_moments(const MomentSet& raw) {
  if (raw.kind != MomentKind::Raw)
    fail(ErrorCode::InvalidOptions, "the LDA pipeline expects raw (non-central) moments");
  LdaInputs in;
  in.d = raw.d();
  in.mean = raw.mean;
  in.pairs = raw.pairs;
  auto pairs = std::make_shared<Matrix>(raw.pairs);
  in.pairs_action = [pairs](const Vector& v) -> Vector { return *pairs * v; };
  auto triples = raw.triples;
  in.whitened_third = [triples](const Matrix& w) { return whitened_third_from_oracle(triples, w); };
  in.docs_used = raw.n_samples;
  return in;
}

WhitenedOperator::WhitenedOperator(WhitenedThird s, Vector m, Matrix g, double alpha0)
    : s_(std::move(s)), m_(std::move(m)), g_(std::move(g)), alpha0_(alpha0) {}

Matrix WhitenedOperator::operator()(const Vector& theta) const {
  Matrix t = s_.contract(theta);
  if (alpha0_ == 0.0) return t;
  const double a = alpha0_;
  const double tm = theta.dot(m_);
  const Vector gt = g_ * theta;
  t -= a / (a + 2.0) * (gt * m_.transpose() + m_ * gt.transpose() + tm * g_);
  t += 2.0 * a * a / ((a + 2.0) * (a + 1.0)) * tm * (m_ * m_.transpose());
  return t;
}

double WhitenedOperator::cubic(const Vector& v) const { return v.dot((*this)(v) * v); }

namespace {

constexpr double kDedupCos = 1.0 - 1e-6;
// A cubic form this small relative to the operator scale cannot be inverted
// into a trustworthy Z.
constexpr double kUnreliableCubic = 1e-8;

struct Directions {
  std::vector<Vector> vectors;
  std::vector<double> values;
  double min_gap = 0.0;
  int attempts = 0;
  int iterations = 0;
  bool converged = true;
  Vector theta_used;
};

// Every retry direction is tried. When one or more of them separate all k
// singular values, the one with the widest relative gap wins: under sampling
// noise a near tie mixes the two vectors even though both are flagged unique.
// Otherwise uniquely-flagged vectors are pooled across directions.
Directions dense_directions(const WhitenedOperator& op, const FitOptions& opts) {
  const Eigen::Index k = op.k();
  Directions out;
  std::vector<std::pair<double, Vector>> pooled;
  double pooled_gap = std::numeric_limits<double>::infinity();
  double best_score = -1.0;
  std::optional<SvdExtraction> best;
  double best_gap = 0.0;
  for (int r = 0; r < opts.theta_retries; ++r) {
    Rng rng(derive_seed(opts.seed, 100 + static_cast<std::uint64_t>(r)));
    const Vector theta = random_unit_vector(k, rng);
    SvdExtraction ext = unique_singular_vectors(op(theta));
    double min_gap = ext.values.size() == 1 ? ext.values[0] : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ext.values.size(); ++i)
      for (std::size_t j = i + 1; j < ext.values.size(); ++j)
        min_gap = std::min(min_gap, std::abs(ext.values[i] - ext.values[j]));
    if (static_cast<Eigen::Index>(ext.unique_count()) == k) {
      const double score = min_gap / ext.values.front();
      if (score > best_score) {
        best_score = score;
        best_gap = min_gap;
        best = std::move(ext);
        out.theta_used = theta;
      }
      continue;
    }
    if (best) continue;
    if (r == 0) out.theta_used = theta;
    for (std::size_t i = 0; i < ext.vectors.size(); ++i) {
      if (!ext.unique[i]) continue;
      const Vector& v = ext.vectors[i];
      if (std::any_of(pooled.begin(), pooled.end(),
                      [&](const auto& a) { return std::abs(a.second.dot(v)) > kDedupCos; }))
        continue;
      double gap = ext.values.size() == 1 ? ext.values[0] : std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < ext.values.size(); ++j)
        if (j != i) gap = std::min(gap, std::abs(ext.values[i] - ext.values[j]));
      pooled_gap = std::min(pooled_gap, gap);
      pooled.emplace_back(ext.values[i], v);
    }
  }
  out.attempts = opts.theta_retries;
  if (best) {
    out.vectors = best->vectors;
    out.values = best->values;
    out.min_gap = best_gap;
    return out;
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (static_cast<Eigen::Index>(pooled.size()) > k) pooled.resize(static_cast<std::size_t>(k));
  for (auto& [value, v] : pooled) {
    out.values.push_back(value);
    out.vectors.push_back(std::move(v));
  }
  out.min_gap = pooled.empty() ? 0.0 : pooled_gap;
  return out;
}

// Iterates v <- T(v) v with re-orthonormalization. The fixed points are the
// components of the whitened tensor, so equal values are not ambiguous here:
// a converged basis is accepted as is.
Directions power_directions(const WhitenedOperator& op, const FitOptions& opts) {
  const Eigen::Index k = op.k();
  MatrixAction action = [&op](const Vector& v) -> Vector { return op(v) * v; };
  SvdExtraction ext =
      power_iteration_svd(action, k, derive_seed(opts.seed, 0x90), opts.max_iter, opts.conv_tol);
  Directions out;
  out.iterations = ext.iterations;
  out.converged = ext.converged;
  out.attempts = 1;
  out.theta_used = Vector();
  if (!ext.converged) return out;
  out.vectors = ext.vectors;
  out.values = ext.values;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    for (std::size_t j = i + 1; j < out.values.size(); ++j)
      out.min_gap = std::min(out.min_gap, std::abs(out.values[i] - out.values[j]));
  if (out.values.size() == 1) out.min_gap = out.values[0];
  return out;
}

}  // namespace

RecoveryResult fit_lda(const LdaInputs& in, const FitOptions& opts) {
  opts.validate();
  const Eigen::Index k = opts.k;
  if (k > in.d)
    fail(ErrorCode::InsufficientRank, "k=" + std::to_string(k) + " exceeds d=" + std::to_string(in.d));
  const double a0 = opts.alpha0;
  const double shrink = a0 / (a0 + 1.0);

  WhiteningMap white;
  if (in.pairs) {
    Matrix pa = *in.pairs - shrink * in.mean * in.mean.transpose();
    white = truncated_whiten(pa, k);
  } else {
    const Vector mu = in.mean;
    const MatrixAction raw = in.pairs_action;
    MatrixAction modified = [raw, mu, shrink](const Vector& v) -> Vector {
      return raw(v) - shrink * mu.dot(v) * mu;
    };
    white = truncated_whiten(modified, in.d, k, derive_seed(opts.seed, 0));
  }
  const Matrix& w = white.w;

  Matrix pw(in.d, k);
  for (Eigen::Index j = 0; j < k; ++j) pw.col(j) = in.pairs_action(w.col(j));
  WhitenedOperator op(in.whitened_third(w), w.transpose() * in.mean, w.transpose() * pw, a0);

  Directions dirs =
      opts.svd_method == SvdMethod::Dense ? dense_directions(op, opts) : power_directions(op, opts);

  RecoveryResult res;
  res.theta_used = dirs.theta_used;
  res.diagnostics.whitening_residual = white.residual;
  res.diagnostics.min_singular_gap = dirs.min_gap;
  res.diagnostics.theta_attempts = dirs.attempts;
  res.diagnostics.power_iterations = dirs.iterations;
  res.diagnostics.power_converged = dirs.converged;
  res.diagnostics.docs_used = in.docs_used;
  res.diagnostics.docs_skipped = in.docs_skipped;

  const double scale = dirs.values.empty() ? 0.0 : dirs.values.front();
  bool all_reliable = true;
  for (std::size_t i = 0; i < dirs.vectors.size(); ++i) {
    const Vector& v = dirs.vectors[i];
    const double cubic = op.cubic(v);
    Vector col = white.reconstruct(v);
    const bool unreliable = !(std::abs(cubic) > kUnreliableCubic * scale);
    double z = std::numeric_limits<double>::quiet_NaN();
    if (!unreliable) {
      z = 2.0 / ((a0 + 2.0) * cubic);
      col /= z;
      z = std::abs(z);
    } else {
      all_reliable = false;
      // Left unscaled; only the sign is fixed so the entry sum is positive.
      if (col.sum() < 0) col = -col;
    }
    if (opts.clip_normalize) col = clip_normalize(col, opts.clip_fraction);
    res.columns.push_back(std::move(col));
    res.singular_values.push_back(dirs.values[i]);
    res.skewness_estimates.push_back(cubic);
    res.scale_estimates.push_back(z);
    res.diagnostics.unreliable.push_back(unreliable);
  }
  res.status = static_cast<Eigen::Index>(res.columns.size()) == k ? RecoveryStatus::Complete
                                                                  : RecoveryStatus::NotAllRecovered;
  if (res.status == RecoveryStatus::Complete && a0 > 0.0 && all_reliable) {
    Vector alpha(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double z = res.scale_estimates[static_cast<std::size_t>(i)];
      alpha(i) = (a0 + 1.0) * a0 * z * z;
    }
    res.alpha_hat = alpha;
  }
  return res;
}

RecoveryResult fit_lda(const Corpus& corpus, const FitOptions& opts) {
  opts.validate();
  return fit_lda(inputs_from_corpus(corpus, opts), opts);
}

RecoveryResult fit_lda(const MomentSet& raw, const FitOptions& opts) {
  return fit_lda(inputs_from_moments(raw), opts);
}

Vector clip_normalize(const Vector& column, double clip_fraction) {
  if (!column.allFinite()) fail(ErrorCode::InvalidOptions, "clip_normalize: column is not finite");
  if (!(clip_fraction >= 0.0 && clip_fraction < 1.0))
    fail(ErrorCode::InvalidOptions, "clip_fraction must lie in [0, 1)");
  Vector out = column;
  const double budget = clip_fraction * column.lpNorm<1>();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(column.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(column(a)) < std::abs(column(b));
  });
  double removed = 0.0;
  for (Eigen::Index i : order) {
    const double m = std::abs(column(i));
    if (removed + m > budget) break;
    removed += m;
    out(i) = 0.0;
  }
  out = out.cwiseMax(0.0);
  const double sum = out.sum();
  if (!(sum > 0.0)) fail(ErrorCode::AllZeroAfterClip, "no positive mass left after clipping");
  return out / sum;
}

}  // namespace eca
