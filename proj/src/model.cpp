#include "eca/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eca/error.hpp"

namespace eca {

std::string topic_mode_name(TopicMode mode) {
  switch (mode) {
    case TopicMode::Canonical: return "canonical";
    case TopicMode::ProbabilityColumns: return "probability-columns";
    case TopicMode::Raw: return "raw";
  }
  return "raw";
}

TopicMatrix make_topic_matrix(Matrix entries, TopicMode mode, double rank_tol) {
  if (entries.cols() == 0 || entries.rows() < entries.cols())
    fail(ErrorCode::DimensionMismatch, "topic matrix needs d >= k >= 1, got " +
                                           std::to_string(entries.rows()) + "x" +
                                           std::to_string(entries.cols()));
  if (!entries.allFinite()) fail(ErrorCode::RankDeficient, "topic matrix has non-finite entries");
  if (mode == TopicMode::ProbabilityColumns) {
    if ((entries.array() < 0.0).any())
      fail(ErrorCode::BadColumnNormalization, "probability columns must be nonnegative");
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      double s = entries.col(j).sum();
      if (std::abs(s - 1.0) > 1e-12)
        fail(ErrorCode::BadColumnNormalization,
             "column " + std::to_string(j) + " sums to " + std::to_string(s));
    }
  }
  Eigen::JacobiSVD<Matrix> svd(entries);
  const Vector& s = svd.singularValues();
  double smax = s(0);
  double smin = s(s.size() - 1);
  if (smax == 0.0 || smin / smax < rank_tol)
    fail(ErrorCode::RankDeficient, "topic matrix columns are linearly dependent (sigma_k/sigma_1 = " +
                                       std::to_string(smax == 0.0 ? 0.0 : smin / smax) + ")");
  return TopicMatrix(std::move(entries), mode, smin, smax);
}

FactorSpec FactorSpec::from_moments(std::vector<FactorMoments> factors,
                                    std::optional<Vector> mean) {
  if (factors.empty()) fail(ErrorCode::InvalidFactor, "need at least one factor");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    if (!(f.variance > 0.0) || !std::isfinite(f.variance))
      fail(ErrorCode::InvalidFactor, "factor " + std::to_string(i) + ": variance must be > 0");
    // Cauchy-Schwarz: E[z^4] >= E[z^2]^2.
    if (f.mu4 < f.variance * f.variance * (1.0 - 1e-12))
      fail(ErrorCode::InvalidFactor, "factor " + std::to_string(i) + ": mu4 < sigma^4");
  }
  if (mean && static_cast<std::size_t>(mean->size()) != factors.size())
    fail(ErrorCode::DimensionMismatch, "factor mean has wrong length");
  return FactorSpec(std::move(factors), std::move(mean));
}

double FactorSpec::sigma(std::size_t i) const { return std::sqrt(factors_.at(i).variance); }

double FactorSpec::skewness(std::size_t i) const {
  double s = sigma(i);
  return factors_[i].mu3 / (s * s * s);
}

double FactorSpec::excess_kurtosis(std::size_t i) const {
  double v = factors_.at(i).variance;
  return factors_[i].mu4 / (v * v) - 3.0;
}

Vector FactorSpec::variances() const {
  Vector v(k());
  for (std::size_t i = 0; i < k(); ++i) v(i) = factors_[i].variance;
  return v;
}

Vector FactorSpec::third_moments() const {
  Vector v(k());
  for (std::size_t i = 0; i < k(); ++i) v(i) = factors_[i].mu3;
  return v;
}

Vector FactorSpec::fourth_cumulants() const {
  Vector v(k());
  for (std::size_t i = 0; i < k(); ++i)
    v(i) = factors_[i].mu4 - 3.0 * factors_[i].variance * factors_[i].variance;
  return v;
}

DirichletParams::DirichletParams(Vector alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() == 0) fail(ErrorCode::InvalidDirichlet, "alpha must be non-empty");
  for (Eigen::Index i = 0; i < alpha_.size(); ++i)
    if (!(alpha_(i) > 0.0) || !std::isfinite(alpha_(i)))
      fail(ErrorCode::InvalidDirichlet, "alpha entries must be finite and > 0");
  alpha0_ = alpha_.sum();
}

double DirichletParams::effective_skewness(Eigen::Index i) const {
  double a0 = alpha0_;
  return 2.0 * std::sqrt(a0 * (a0 + 1.0) / ((a0 + 2.0) * (a0 + 2.0) * alpha_(i)));
}

Document Document::from_tokens(std::vector<std::int32_t> tokens) {
  std::map<std::int32_t, std::int32_t> counts;
  for (auto t : tokens) ++counts[t];
  Document doc;
  doc.ids.reserve(counts.size());
  doc.counts.reserve(counts.size());
  for (auto [id, c] : counts) {
    doc.ids.push_back(id);
    doc.counts.push_back(c);
  }
  doc.length = static_cast<std::int64_t>(tokens.size());
  doc.tokens = std::move(tokens);
  return doc;
}

Document Document::from_counts(std::vector<std::pair<std::int32_t, std::int32_t>> id_counts) {
  std::map<std::int32_t, std::int64_t> merged;
  for (auto [id, c] : id_counts) merged[id] += c;
  Document doc;
  for (auto [id, c] : merged) {
    doc.ids.push_back(id);
    doc.counts.push_back(static_cast<std::int32_t>(c));
    doc.length += c;
  }
  return doc;
}

void Corpus::validate() const {
  if (d <= 0) fail(ErrorCode::DimensionMismatch, "corpus vocabulary size must be positive");
  for (std::size_t n = 0; n < documents.size(); ++n) {
    const auto& doc = documents[n];
    if (doc.ids.size() != doc.counts.size())
      fail(ErrorCode::DimensionMismatch, "document " + std::to_string(n) + ": ids/counts differ");
    std::int64_t total = 0;
    for (std::size_t j = 0; j < doc.ids.size(); ++j) {
      if (doc.ids[j] < 0 || doc.ids[j] >= d)
        fail(ErrorCode::IndexOutOfRange, "document " + std::to_string(n) + ": token id " +
                                             std::to_string(doc.ids[j]) + " outside [0, d)");
      if (doc.counts[j] < 1)
        fail(ErrorCode::CountNonPositive, "document " + std::to_string(n) + ": count < 1");
      total += doc.counts[j];
    }
    if (total != doc.length)
      fail(ErrorCode::DimensionMismatch, "document " + std::to_string(n) + ": length mismatch");
  }
}

Matrix RecoveryResult::columns_matrix() const {
  if (columns.empty()) return Matrix();
  Matrix m(columns.front().size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = columns[j];
  return m;
}

TopicMatrix canonicalize(const TopicMatrix& o, const FactorSpec& f) {
  if (static_cast<std::size_t>(o.k()) != f.k())
    fail(ErrorCode::DimensionMismatch, "canonicalize: topic matrix has k=" + std::to_string(o.k()) +
                                           " but factor spec has k=" + std::to_string(f.k()));
  Matrix scaled = o.entries();
  for (Eigen::Index i = 0; i < o.k(); ++i) {
    scaled.col(i) *= f.sigma(static_cast<std::size_t>(i));
    fix_sign_largest_positive(scaled.col(i));
  }
  return make_topic_matrix(std::move(scaled), TopicMode::Canonical, 0.0);
}

TopicMatrix canonicalize(const TopicMatrix& o, const DirichletParams& p) {
  if (o.k() != p.k()) fail(ErrorCode::DimensionMismatch, "canonicalize: alpha length != k");
  double a0 = p.alpha0();
  Matrix scaled = o.entries();
  for (Eigen::Index i = 0; i < o.k(); ++i) {
    scaled.col(i) *= std::sqrt(p.alpha()(i) / ((a0 + 1.0) * a0));
    fix_sign_largest_positive(scaled.col(i));
  }
  return make_topic_matrix(std::move(scaled), TopicMode::Canonical, 0.0);
}

}  // namespace eca
