#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "eca/linalg.hpp"
#include "eca/model.hpp"

namespace eca {

enum class Provenance { Analytic, Empirical };

/// Central: Pairs = E[(x1-mu)(x2-mu)^T], Triples(eta) = E[(x1-mu)(x2-mu)^T <eta, x3-mu>].
/// Raw: the non-central versions E[x1 x2^T], E[x1 x2^T <eta, x3>].
/// DirichletModified: Pairs_{a0} and Triples_{a0}(eta).
enum class MomentKind { Central, Raw, DirichletModified };

using TriplesOracle = std::function<Matrix(const Vector&)>;
using QuadOracle = std::function<Matrix(const Vector&, const Vector&)>;

/// Low-order moments of an exchangeable model. The third (and optional
/// fourth) moment tensors are only ever exposed through contractions.
struct MomentSet {
  Vector mean;
  Matrix pairs;
  TriplesOracle triples;
  QuadOracle quad;  // empty when unavailable
  MomentKind kind = MomentKind::Central;
  Provenance provenance = Provenance::Analytic;
  std::size_t n_samples = 0;

  Eigen::Index d() const { return pairs.rows(); }
  bool has_quad() const { return static_cast<bool>(quad); }
  Matrix triples_contract(const Vector& eta) const;
  Matrix quad_contract(const Vector& eta, const Vector& eta2) const;
};

// Exact constructors for the independent-factor model, in terms of the
// factor central moments.

/// O diag(sigma^2) O^T.
Matrix exact_pairs(const TopicMatrix& o, const FactorSpec& f);
/// O diag(O^T eta) diag(mu3) O^T.
Matrix exact_triples_contract(const TopicMatrix& o, const FactorSpec& f, const Vector& eta);
/// O diag(O^T eta) diag(O^T eta2) diag(mu4 - 3 sigma^4) O^T.
Matrix exact_quad_contract(const TopicMatrix& o, const FactorSpec& f, const Vector& eta,
                           const Vector& eta2);

/// Central MomentSet built from the three constructors above. The mean is
/// O E[h] when the factor spec carries one, zero otherwise.
MomentSet exact_moments(const TopicMatrix& o, const FactorSpec& f);

struct DirichletRawMoments {
  Vector mean;    // E[h]
  Matrix second;  // E[h h^T]
  std::function<Matrix(const Vector&)> third_contract;  // v -> E[h h^T <v, h>]
};

DirichletRawMoments dirichlet_raw_moments(const DirichletParams& p);

/// Raw (non-central) moments of the LDA model with topic matrix O.
MomentSet exact_lda_moments(const TopicMatrix& o, const DirichletParams& p);

/// Raw moments of the single-topic model (the alpha0 -> 0 limit of LDA), where
/// each document is about exactly one topic, chosen with probability weights_i.
MomentSet exact_single_topic_moments(const TopicMatrix& o, const Vector& weights);

/// E[x1 x2^T] - a0/(a0+1) mu mu^T.
Matrix modified_pairs(const MomentSet& raw, double alpha0);
Matrix modified_triples_contract(const MomentSet& raw, double alpha0, const Vector& eta);

/// Bundles modified_pairs / modified_triples_contract. alpha0 == 0 returns the
/// raw moments unchanged (no division is performed).
MomentSet modified_moments(const MomentSet& raw, double alpha0);

/// Central moments from raw ones, using exchangeability (the alpha0 -> infinity
/// limit of the modification).
MomentSet centralize(const MomentSet& raw);

/// Central moments of dense multi-view samples. Each view is d x n with one
/// sample per column; 3 views give Pairs and Triples, 4 views add Quad.
MomentSet sample_moments(const std::vector<Matrix>& views);

// ---------------------------------------------------------------------------
// Corpus accumulation

enum class TripleEstimator { AllDistinctTriples, FirstThreeTokens };

struct MomentOptions {
  TripleEstimator estimator = TripleEstimator::AllDistinctTriples;
  std::int64_t min_tokens = 3;
  /// Above this vocabulary size Pairs is never materialized densely.
  std::int64_t dense_pairs_cap = 20000;
  /// Keep compact per-document counts so Triples(eta) can be contracted on demand.
  bool keep_documents = true;
  /// Used only by FirstThreeTokens on documents without token order.
  std::uint64_t seed = 0;
  int threads = 1;

  bool operator==(const MomentOptions& o) const {
    return estimator == o.estimator && min_tokens == o.min_tokens &&
           dense_pairs_cap == o.dense_pairs_cap && keep_documents == o.keep_documents &&
           seed == o.seed;
  }
};

/// The counts a document contributes under the chosen estimator.
struct CompactDoc {
  std::vector<std::int32_t> ids;
  std::vector<double> counts;
  double length = 0.0;
};

/// Returns false when the document is too short to qualify.
bool effective_document(const Document& doc, std::size_t doc_index, const MomentOptions& opts,
                        CompactDoc& out);

/// Running sums for the empirical first/second moments, plus the compact
/// documents needed to contract the third moment later.
class MomentAccumulator {
 public:
  MomentAccumulator(std::int32_t d, MomentOptions opts);

  void add(const Document& doc, std::size_t doc_index);

  std::int32_t d() const { return d_; }
  const MomentOptions& options() const { return opts_; }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t n_skipped() const { return n_skipped_; }
  bool has_dense_pairs() const { return pairs_sum_.size() > 0; }
  const Vector& mean_sum() const { return mean_sum_; }
  const Matrix& pairs_sum() const { return pairs_sum_; }
  const std::vector<CompactDoc>& documents() const { return docs_; }

  friend MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b);

 private:
  std::int32_t d_;
  MomentOptions opts_;
  std::size_t n_docs_ = 0;
  std::size_t n_skipped_ = 0;
  Vector mean_sum_;
  Matrix pairs_sum_;
  std::vector<CompactDoc> docs_;
};

MomentAccumulator accumulate(const Corpus& corpus, const MomentOptions& opts);
/// Commutative and associative; throws OptionsMismatch on differing d/options.
MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b);
/// Raw empirical MomentSet (pairs symmetrized). Throws EmptyAccumulator.
MomentSet finalize(const MomentAccumulator& acc);

/// Per-document contributions, exposed for the streaming pipeline.
Vector pairs_apply(const std::vector<CompactDoc>& docs, const Vector& v);
Matrix triples_contract_docs(const std::vector<CompactDoc>& docs, std::int32_t d, const Vector& eta);

/// k x k x k tensor E[y1 (x) y2 (x) y3] for whitened tokens y = W^T x,
/// stored row-major as data[(a*k + b)*k + c].
struct WhitenedThird {
  Eigen::Index k = 0;
  std::vector<double> data;
  std::size_t n_samples = 0;

  double at(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return data[static_cast<std::size_t>((a * k + b) * k + c)];
  }
  /// M_ab = sum_c S_abc theta_c.
  Matrix contract(const Vector& theta) const;
};

/// Second pass of the two-pass strategy: only k^3 statistics are kept.
class WhitenedThirdAccumulator {
 public:
  WhitenedThirdAccumulator(Matrix w, MomentOptions opts);
  void add(const Document& doc, std::size_t doc_index);
  void merge_from(const WhitenedThirdAccumulator& other);
  WhitenedThird finalize() const;
  std::size_t n_docs() const { return n_docs_; }

 private:
  Matrix w_;
  MomentOptions opts_;
  std::size_t n_docs_ = 0;
  std::vector<double> sum_;
};

WhitenedThird accumulate_whitened_third(const Corpus& corpus, const Matrix& w,
                                        const MomentOptions& opts);

/// Same tensor computed by contracting an oracle against the columns of W.
WhitenedThird whitened_third_from_oracle(const TriplesOracle& triples, const Matrix& w);

}  // namespace eca
