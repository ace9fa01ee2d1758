#include "eca/moments.hpp"

#include <algorithm>
#include <array>
#include <future>
#include <numeric>

#include "eca/error.hpp"

namespace eca {

namespace {

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": expected dimension " +
                                           std::to_string(want) + ", got " + std::to_string(got));
}

void check_factor_dims(const TopicMatrix& o, const FactorSpec& f) {
  if (static_cast<std::size_t>(o.k()) != f.k())
    fail(ErrorCode::DimensionMismatch, "topic matrix k=" + std::to_string(o.k()) +
                                           " but factor spec k=" + std::to_string(f.k()));
}

void check_alpha0(double alpha0) {
  if (alpha0 < 0.0) fail(ErrorCode::NegativeAlpha0, "alpha0 must be >= 0");
}

constexpr std::size_t kShardDocs = 4096;

}  // namespace

Matrix MomentSet::triples_contract(const Vector& eta) const {
  check_dim(eta.size(), d(), "triples contraction");
  return triples(eta);
}

Matrix MomentSet::quad_contract(const Vector& eta, const Vector& eta2) const {
  if (!quad) fail(ErrorCode::InvalidOptions, "moment set has no fourth-moment contraction");
  check_dim(eta.size(), d(), "quad contraction");
  check_dim(eta2.size(), d(), "quad contraction");
  return quad(eta, eta2);
}

Matrix exact_pairs(const TopicMatrix& o, const FactorSpec& f) {
  check_factor_dims(o, f);
  const Matrix& m = o.entries();
  return m * f.variances().asDiagonal() * m.transpose();
}

Matrix exact_triples_contract(const TopicMatrix& o, const FactorSpec& f, const Vector& eta) {
  check_factor_dims(o, f);
  check_dim(eta.size(), o.d(), "exact_triples_contract");
  const Matrix& m = o.entries();
  Vector weights = (m.transpose() * eta).cwiseProduct(f.third_moments());
  return m * weights.asDiagonal() * m.transpose();
}

Matrix exact_quad_contract(const TopicMatrix& o, const FactorSpec& f, const Vector& eta,
                           const Vector& eta2) {
  check_factor_dims(o, f);
  check_dim(eta.size(), o.d(), "exact_quad_contract");
  check_dim(eta2.size(), o.d(), "exact_quad_contract");
  const Matrix& m = o.entries();
  Vector weights = (m.transpose() * eta)
                       .cwiseProduct(m.transpose() * eta2)
                       .cwiseProduct(f.fourth_cumulants());
  return m * weights.asDiagonal() * m.transpose();
}

MomentSet exact_moments(const TopicMatrix& o, const FactorSpec& f) {
  MomentSet ms;
  ms.pairs = exact_pairs(o, f);
  ms.mean = f.mean() ? Vector(o.entries() * *f.mean()) : Vector(Vector::Zero(o.d()));
  ms.triples = [o, f](const Vector& eta) { return exact_triples_contract(o, f, eta); };
  ms.quad = [o, f](const Vector& a, const Vector& b) { return exact_quad_contract(o, f, a, b); };
  ms.kind = MomentKind::Central;
  ms.provenance = Provenance::Analytic;
  return ms;
}

DirichletRawMoments dirichlet_raw_moments(const DirichletParams& p) {
  const Vector alpha = p.alpha();
  const double a0 = p.alpha0();
  DirichletRawMoments out;
  out.mean = alpha / a0;
  Matrix diag_alpha = alpha.asDiagonal();
  out.second = (diag_alpha + alpha * alpha.transpose()) / ((a0 + 1.0) * a0);
  const double scale = 1.0 / ((a0 + 2.0) * (a0 + 1.0) * a0);
  out.third_contract = [alpha, scale](const Vector& v) -> Matrix {
    check_dim(v.size(), alpha.size(), "dirichlet third moment");
    const double va = v.dot(alpha);
    Vector av = alpha.cwiseProduct(v);
    Matrix m = va * alpha * alpha.transpose();
    m += av * alpha.transpose();
    m += alpha * av.transpose();
    m.diagonal() += va * alpha + 2.0 * av;
    return scale * m;
  };
  return out;
}

MomentSet exact_lda_moments(const TopicMatrix& o, const DirichletParams& p) {
  if (o.k() != p.k()) fail(ErrorCode::DimensionMismatch, "alpha length != number of topics");
  DirichletRawMoments h = dirichlet_raw_moments(p);
  const Matrix m = o.entries();
  MomentSet ms;
  ms.mean = m * h.mean;
  ms.pairs = symmetrized(m * h.second * m.transpose());
  auto third = h.third_contract;
  ms.triples = [m, third](const Vector& eta) -> Matrix {
    check_dim(eta.size(), m.rows(), "lda triples contraction");
    return m * third(m.transpose() * eta) * m.transpose();
  };
  ms.kind = MomentKind::Raw;
  ms.provenance = Provenance::Analytic;
  return ms;
}

MomentSet exact_single_topic_moments(const TopicMatrix& o, const Vector& weights) {
  check_dim(weights.size(), o.k(), "single-topic weights");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
    fail(ErrorCode::InvalidDirichlet, "single-topic weights must be a probability vector");
  const Matrix m = o.entries();
  MomentSet ms;
  ms.mean = m * weights;
  ms.pairs = symmetrized(m * weights.asDiagonal() * m.transpose());
  ms.triples = [m, weights](const Vector& eta) -> Matrix {
    check_dim(eta.size(), m.rows(), "single-topic triples contraction");
    Vector w = (m.transpose() * eta).cwiseProduct(weights);
    return m * w.asDiagonal() * m.transpose();
  };
  ms.kind = MomentKind::Raw;
  ms.provenance = Provenance::Analytic;
  return ms;
}

Matrix modified_pairs(const MomentSet& raw, double alpha0) {
  check_alpha0(alpha0);
  if (alpha0 == 0.0) return raw.pairs;
  const double c = alpha0 / (alpha0 + 1.0);
  return raw.pairs - c * raw.mean * raw.mean.transpose();
}

namespace {

// E[x1 x2^T <eta,x3>] - c2 (P eta mu^T + mu eta^T P + <eta,mu> P) + c3 <eta,mu> mu mu^T
Matrix combine_triples(const MomentSet& raw, double c2, double c3, const Vector& eta) {
  Matrix t = raw.triples_contract(eta);
  const Vector& mu = raw.mean;
  const Vector p_eta = raw.pairs * eta;
  const double eta_mu = eta.dot(mu);
  t -= c2 * (p_eta * mu.transpose() + mu * p_eta.transpose() + eta_mu * raw.pairs);
  t += (c3 * eta_mu) * mu * mu.transpose();
  return t;
}

}  // namespace

Matrix modified_triples_contract(const MomentSet& raw, double alpha0, const Vector& eta) {
  check_alpha0(alpha0);
  if (alpha0 == 0.0) return raw.triples_contract(eta);
  const double c2 = alpha0 / (alpha0 + 2.0);
  const double c3 = 2.0 * alpha0 * alpha0 / ((alpha0 + 2.0) * (alpha0 + 1.0));
  return combine_triples(raw, c2, c3, eta);
}

MomentSet modified_moments(const MomentSet& raw, double alpha0) {
  check_alpha0(alpha0);
  MomentSet out = raw;
  out.pairs = modified_pairs(raw, alpha0);
  if (alpha0 != 0.0) {
    auto base = std::make_shared<MomentSet>(raw);
    out.triples = [base, alpha0](const Vector& eta) {
      return modified_triples_contract(*base, alpha0, eta);
    };
  }
  out.quad = nullptr;
  out.kind = MomentKind::DirichletModified;
  return out;
}

MomentSet centralize(const MomentSet& raw) {
  if (raw.kind == MomentKind::Central) return raw;
  MomentSet out = raw;
  out.pairs = raw.pairs - raw.mean * raw.mean.transpose();
  auto base = std::make_shared<MomentSet>(raw);
  out.triples = [base](const Vector& eta) { return combine_triples(*base, 1.0, 2.0, eta); };
  out.quad = nullptr;
  out.kind = MomentKind::Central;
  return out;
}

MomentSet sample_moments(const std::vector<Matrix>& views) {
  if (views.size() < 3 || views.size() > 4)
    fail(ErrorCode::InvalidOptions, "sample_moments needs 3 or 4 views");
  const Eigen::Index d = views[0].rows();
  const Eigen::Index n = views[0].cols();
  if (n == 0) fail(ErrorCode::EmptyCorpus, "no samples");
  for (const auto& v : views) {
    check_dim(v.rows(), d, "view dimension");
    check_dim(v.cols(), n, "view sample count");
  }
  Vector mu = Vector::Zero(d);
  for (const auto& v : views) mu += v.rowwise().mean();
  mu /= static_cast<double>(views.size());

  auto centered = std::make_shared<std::vector<Matrix>>();
  for (const auto& v : views) centered->push_back(v.colwise() - mu);
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& c = *centered;

  MomentSet ms;
  ms.mean = mu;
  ms.pairs = symmetrized(c[0] * c[1].transpose() * inv_n);
  ms.triples = [centered, inv_n](const Vector& eta) -> Matrix {
    const auto& c = *centered;
    check_dim(eta.size(), c[0].rows(), "sample triples contraction");
    Vector w = c[2].transpose() * eta;
    Matrix t = c[0] * w.asDiagonal() * c[1].transpose() * inv_n;
    return symmetrized(t);
  };
  if (views.size() == 4) {
    Matrix pairs = ms.pairs;
    ms.quad = [centered, inv_n, pairs](const Vector& eta, const Vector& eta2) -> Matrix {
      const auto& c = *centered;
      check_dim(eta.size(), c[0].rows(), "sample quad contraction");
      Vector w = (c[2].transpose() * eta).cwiseProduct(c[3].transpose() * eta2);
      Matrix q = symmetrized(c[0] * w.asDiagonal() * c[1].transpose() * inv_n);
      const Vector pa = pairs * eta;
      const Vector pb = pairs * eta2;
      q -= eta.dot(pb) * pairs + pa * pb.transpose() + pb * pa.transpose();
      return q;
    };
  }
  ms.kind = MomentKind::Central;
  ms.provenance = Provenance::Empirical;
  ms.n_samples = static_cast<std::size_t>(n);
  return ms;
}

// ---------------------------------------------------------------------------

bool effective_document(const Document& doc, std::size_t doc_index, const MomentOptions& opts,
                        CompactDoc& out) {
  const std::int64_t need = std::max<std::int64_t>(3, opts.min_tokens);
  if (doc.length < need) return false;
  out.ids.clear();
  out.counts.clear();
  if (opts.estimator == TripleEstimator::AllDistinctTriples) {
    out.ids = doc.ids;
    out.counts.assign(doc.counts.begin(), doc.counts.end());
    out.length = static_cast<double>(doc.length);
    return true;
  }
  std::array<std::int32_t, 3> picked{};
  if (!doc.tokens.empty()) {
    std::copy_n(doc.tokens.begin(), 3, picked.begin());
  } else {
    // Without token order, three distinct positions drawn uniformly have the
    // same joint law as the first three tokens of an exchangeable sequence.
    std::vector<std::int32_t> expanded;
    expanded.reserve(static_cast<std::size_t>(doc.length));
    for (std::size_t j = 0; j < doc.ids.size(); ++j)
      expanded.insert(expanded.end(), static_cast<std::size_t>(doc.counts[j]), doc.ids[j]);
    Rng rng(derive_seed(opts.seed, doc_index));
    for (std::size_t i = 0; i < 3; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, expanded.size() - 1);
      std::swap(expanded[i], expanded[pick(rng)]);
      picked[i] = expanded[i];
    }
  }
  std::sort(picked.begin(), picked.end());
  for (auto id : picked) {
    if (!out.ids.empty() && out.ids.back() == id) {
      out.counts.back() += 1.0;
    } else {
      out.ids.push_back(id);
      out.counts.push_back(1.0);
    }
  }
  out.length = 3.0;
  return true;
}

MomentAccumulator::MomentAccumulator(std::int32_t d, MomentOptions opts)
    : d_(d), opts_(opts), mean_sum_(Vector::Zero(d)) {
  if (d <= 0) fail(ErrorCode::DimensionMismatch, "accumulator dimension must be positive");
  if (d <= opts_.dense_pairs_cap) pairs_sum_ = Matrix::Zero(d, d);
}

void MomentAccumulator::add(const Document& doc, std::size_t doc_index) {
  CompactDoc cd;
  if (!effective_document(doc, doc_index, opts_, cd)) {
    ++n_skipped_;
    return;
  }
  const double n = cd.length;
  const double inv_pairs = 1.0 / (n * (n - 1.0));
  for (std::size_t a = 0; a < cd.ids.size(); ++a) {
    if (cd.ids[a] < 0 || cd.ids[a] >= d_)
      fail(ErrorCode::IndexOutOfRange, "token id outside vocabulary");
    mean_sum_(cd.ids[a]) += cd.counts[a] / n;
  }
  if (has_dense_pairs()) {
    // (c c^T - diag(c)) / (n (n-1)): average over ordered distinct positions.
    for (std::size_t a = 0; a < cd.ids.size(); ++a) {
      const double ca = cd.counts[a];
      for (std::size_t b = 0; b < cd.ids.size(); ++b) {
        double v = ca * cd.counts[b];
        if (a == b) v -= ca;
        pairs_sum_(cd.ids[a], cd.ids[b]) += v * inv_pairs;
      }
    }
  }
  ++n_docs_;
  if (opts_.keep_documents) docs_.push_back(std::move(cd));
}

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b) {
  if (a.d_ != b.d_ || !(a.opts_ == b.opts_))
    fail(ErrorCode::OptionsMismatch, "cannot merge accumulators with different d or options");
  MomentAccumulator out = a;
  out.n_docs_ += b.n_docs_;
  out.n_skipped_ += b.n_skipped_;
  out.mean_sum_ += b.mean_sum_;
  if (out.has_dense_pairs()) out.pairs_sum_ += b.pairs_sum_;
  out.docs_.insert(out.docs_.end(), b.docs_.begin(), b.docs_.end());
  return out;
}

MomentAccumulator accumulate(const Corpus& corpus, const MomentOptions& opts) {
  const std::size_t n = corpus.n_docs();
  const std::size_t shards = std::max<std::size_t>(1, (n + kShardDocs - 1) / kShardDocs);
  auto run_shard = [&](std::size_t s) {
    MomentAccumulator acc(corpus.d, opts);
    const std::size_t end = std::min(n, (s + 1) * kShardDocs);
    for (std::size_t i = s * kShardDocs; i < end; ++i) acc.add(corpus.documents[i], i);
    return acc;
  };
  std::vector<MomentAccumulator> parts;
  parts.reserve(shards);
  if (opts.threads > 1 && shards > 1) {
    // Fixed shard boundaries and merge order keep the result independent of
    // the thread count.
    std::vector<std::future<MomentAccumulator>> futures;
    for (std::size_t s = 0; s < shards; ++s)
      futures.push_back(std::async(std::launch::async, run_shard, s));
    for (auto& f : futures) parts.push_back(f.get());
  } else {
    for (std::size_t s = 0; s < shards; ++s) parts.push_back(run_shard(s));
  }
  MomentAccumulator out = std::move(parts.front());
  for (std::size_t s = 1; s < parts.size(); ++s) out = merge(out, parts[s]);
  if (out.n_docs() == 0)
    fail(ErrorCode::EmptyCorpus, "no document has the required " +
                                     std::to_string(std::max<std::int64_t>(3, opts.min_tokens)) +
                                     " tokens");
  return out;
}

Vector pairs_apply(const std::vector<CompactDoc>& docs, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (const auto& cd : docs) {
    const double n = cd.length;
    double cv = 0.0;
    for (std::size_t a = 0; a < cd.ids.size(); ++a) cv += cd.counts[a] * v(cd.ids[a]);
    const double inv = 1.0 / (n * (n - 1.0));
    for (std::size_t a = 0; a < cd.ids.size(); ++a)
      out(cd.ids[a]) += cd.counts[a] * (cv - v(cd.ids[a])) * inv;
  }
  return out;
}

Matrix triples_contract_docs(const std::vector<CompactDoc>& docs, std::int32_t d, const Vector& eta) {
  check_dim(eta.size(), d, "empirical triples contraction");
  Matrix out = Matrix::Zero(d, d);
  std::vector<double> ceta;
  for (const auto& cd : docs) {
    const double n = cd.length;
    const double inv = 1.0 / (n * (n - 1.0) * (n - 2.0));
    const std::size_t m = cd.ids.size();
    ceta.resize(m);
    double eta_c = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      ceta[a] = cd.counts[a] * eta(cd.ids[a]);
      eta_c += ceta[a];
    }
    // Sum over ordered triples of distinct positions:
    // (eta.c)(c c^T - diag c) - (c o eta) c^T - c (c o eta)^T + 2 diag(c o eta).
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        double v = eta_c * cd.counts[a] * cd.counts[b] - ceta[a] * cd.counts[b] -
                   cd.counts[a] * ceta[b];
        if (a == b) v += -eta_c * cd.counts[a] + 2.0 * ceta[a];
        out(cd.ids[a], cd.ids[b]) += v * inv;
      }
    }
  }
  return out;
}

MomentSet finalize(const MomentAccumulator& acc) {
  if (acc.n_docs() == 0) fail(ErrorCode::EmptyAccumulator, "accumulator holds no documents");
  if (!acc.has_dense_pairs())
    fail(ErrorCode::InvalidOptions, "vocabulary exceeds the dense pairs cap; use the streaming pipeline");
  const double inv_n = 1.0 / static_cast<double>(acc.n_docs());
  MomentSet ms;
  ms.mean = acc.mean_sum() * inv_n;
  ms.pairs = symmetrized(acc.pairs_sum() * inv_n);
  if (acc.options().keep_documents) {
    auto docs = std::make_shared<std::vector<CompactDoc>>(acc.documents());
    const std::int32_t d = acc.d();
    ms.triples = [docs, d, inv_n](const Vector& eta) -> Matrix {
      return symmetrized(triples_contract_docs(*docs, d, eta) * inv_n);
    };
  } else {
    ms.triples = [](const Vector&) -> Matrix {
      fail(ErrorCode::InvalidOptions, "accumulator did not keep documents for triples contraction");
    };
  }
  ms.kind = MomentKind::Raw;
  ms.provenance = Provenance::Empirical;
  ms.n_samples = acc.n_docs();
  return ms;
}

// ---------------------------------------------------------------------------

Matrix WhitenedThird::contract(const Vector& theta) const {
  check_dim(theta.size(), k, "whitened third contraction");
  Matrix m(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) s += at(a, b, c) * theta(c);
      m(a, b) = s;
    }
  return m;
}

WhitenedThirdAccumulator::WhitenedThirdAccumulator(Matrix w, MomentOptions opts)
    : w_(std::move(w)), opts_(opts) {
  const auto k = static_cast<std::size_t>(w_.cols());
  sum_.assign(k * k * k, 0.0);
}

void WhitenedThirdAccumulator::add(const Document& doc, std::size_t doc_index) {
  CompactDoc cd;
  if (!effective_document(doc, doc_index, opts_, cd)) return;
  const Eigen::Index k = w_.cols();
  const double n = cd.length;
  const double inv = 1.0 / (n * (n - 1.0) * (n - 2.0));
  Vector a = Vector::Zero(k);
  for (std::size_t t = 0; t < cd.ids.size(); ++t) a += cd.counts[t] * w_.row(cd.ids[t]).transpose();
  auto idx = [k](Eigen::Index i, Eigen::Index j, Eigen::Index l) {
    return static_cast<std::size_t>((i * k + j) * k + l);
  };
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double aij = a(i) * a(j) * inv;
      for (Eigen::Index l = 0; l < k; ++l) sum_[idx(i, j, l)] += aij * a(l);
    }
  for (std::size_t t = 0; t < cd.ids.size(); ++t) {
    const Vector wt = w_.row(cd.ids[t]).transpose();
    const double c = cd.counts[t] * inv;
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index l = 0; l < k; ++l) {
          double v = -(wt(i) * wt(j) * a(l) + wt(i) * a(j) * wt(l) + a(i) * wt(j) * wt(l)) +
                     2.0 * wt(i) * wt(j) * wt(l);
          sum_[idx(i, j, l)] += c * v;
        }
  }
  ++n_docs_;
}

void WhitenedThirdAccumulator::merge_from(const WhitenedThirdAccumulator& other) {
  if (other.sum_.size() != sum_.size() || !(other.opts_ == opts_))
    fail(ErrorCode::OptionsMismatch, "cannot merge whitened accumulators with different shapes");
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
  n_docs_ += other.n_docs_;
}

WhitenedThird WhitenedThirdAccumulator::finalize() const {
  if (n_docs_ == 0) fail(ErrorCode::EmptyAccumulator, "whitened accumulator holds no documents");
  WhitenedThird out;
  out.k = w_.cols();
  out.n_samples = n_docs_;
  out.data = sum_;
  const double inv_n = 1.0 / static_cast<double>(n_docs_);
  for (auto& v : out.data) v *= inv_n;
  return out;
}

WhitenedThird accumulate_whitened_third(const Corpus& corpus, const Matrix& w,
                                        const MomentOptions& opts) {
  const std::size_t n = corpus.n_docs();
  const std::size_t shards = std::max<std::size_t>(1, (n + kShardDocs - 1) / kShardDocs);
  auto run_shard = [&](std::size_t s) {
    WhitenedThirdAccumulator acc(w, opts);
    const std::size_t end = std::min(n, (s + 1) * kShardDocs);
    for (std::size_t i = s * kShardDocs; i < end; ++i) acc.add(corpus.documents[i], i);
    return acc;
  };
  std::vector<WhitenedThirdAccumulator> parts;
  if (opts.threads > 1 && shards > 1) {
    std::vector<std::future<WhitenedThirdAccumulator>> futures;
    for (std::size_t s = 0; s < shards; ++s)
      futures.push_back(std::async(std::launch::async, run_shard, s));
    for (auto& f : futures) parts.push_back(f.get());
  } else {
    for (std::size_t s = 0; s < shards; ++s) parts.push_back(run_shard(s));
  }
  WhitenedThirdAccumulator out = std::move(parts.front());
  for (std::size_t s = 1; s < parts.size(); ++s) out.merge_from(parts[s]);
  if (out.n_docs() == 0) fail(ErrorCode::EmptyCorpus, "no qualifying documents");
  return out.finalize();
}

WhitenedThird whitened_third_from_oracle(const TriplesOracle& triples, const Matrix& w) {
  const Eigen::Index k = w.cols();
  WhitenedThird out;
  out.k = k;
  out.data.assign(static_cast<std::size_t>(k * k * k), 0.0);
  for (Eigen::Index c = 0; c < k; ++c) {
    Matrix slice = w.transpose() * triples(w.col(c)) * w;
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b)
        out.data[static_cast<std::size_t>((a * k + b) * k + c)] = slice(a, b);
  }
  return out;
}

}  // namespace eca
