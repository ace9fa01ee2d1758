#include "eca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "eca/error.hpp"
#include "eca/spectral.hpp"

namespace eca {

std::vector<std::size_t> solve_assignment(const Matrix& cost) {
  // Shortest augmenting path Hungarian method with potentials, 1-indexed.
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) fail(ErrorCode::DimensionMismatch, "assignment needs a square cost");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

double column_norm(const Vector& v, ColumnNorm norm) {
  return norm == ColumnNorm::L2 ? v.norm() : v.lpNorm<1>();
}

}  // namespace

EvalReport align_columns(const Matrix& truth, const std::vector<Vector>& estimate, bool allow_sign,
                         ColumnNorm cost_norm) {
  const Eigen::Index k = truth.cols();
  const std::size_t m = estimate.size();
  if (static_cast<Eigen::Index>(m) > k)
    fail(ErrorCode::DimensionMismatch, "more recovered columns than true columns");
  for (const auto& c : estimate)
    if (c.size() != truth.rows()) fail(ErrorCode::DimensionMismatch, "column length differs from d");

  // Rows are recovered columns (padded with zero-cost dummies), columns are
  // true columns.
  Matrix cost = Matrix::Zero(k, k);
  Matrix flip = Matrix::Zero(k, k);
  for (std::size_t j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto r = static_cast<Eigen::Index>(j);
      const double plain = column_norm(estimate[j] - truth.col(i), cost_norm);
      const double flipped = column_norm(estimate[j] + truth.col(i), cost_norm);
      if (allow_sign && flipped < plain) {
        cost(r, i) = flipped;
        flip(r, i) = 1.0;
      } else {
        cost(r, i) = plain;
      }
    }
  const std::vector<std::size_t> assign = solve_assignment(cost);

  EvalReport rep;
  rep.missing = static_cast<std::size_t>(k) - m;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = assign[j];
    const bool flipped = flip(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) > 0.0;
    const Vector diff = (flipped ? Vector(-estimate[j]) : estimate[j]) -
                        truth.col(static_cast<Eigen::Index>(i));
    rep.permutation.push_back(i);
    rep.sign_flips.push_back(flipped);
    rep.per_column_l2.push_back(diff.norm());
    rep.per_column_l1.push_back(diff.lpNorm<1>());
  }
  if (m > 0) {
    rep.max_l2 = *std::max_element(rep.per_column_l2.begin(), rep.per_column_l2.end());
    double total = 0.0;
    for (double e : rep.per_column_l2) total += e;
    rep.mean_l2 = total / static_cast<double>(m);
  }
  return rep;
}

EvalReport align_columns(const TopicMatrix& truth, const std::vector<Vector>& estimate,
                         bool allow_sign, ColumnNorm cost) {
  return align_columns(truth.entries(), estimate, allow_sign, cost);
}

double aligned_alpha_error(const Vector& alpha_true, const Vector& alpha_hat,
                           const std::vector<std::size_t>& permutation) {
  if (static_cast<std::size_t>(alpha_hat.size()) != permutation.size())
    fail(ErrorCode::DimensionMismatch, "alpha_hat and permutation disagree in length");
  double err = 0.0;
  for (std::size_t j = 0; j < permutation.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(permutation[j]);
    if (i >= alpha_true.size()) fail(ErrorCode::IndexOutOfRange, "permutation exceeds alpha length");
    err = std::max(err, std::abs(alpha_true(i) - alpha_hat(static_cast<Eigen::Index>(j))));
  }
  return err;
}

double aligned_max_error(const EvalReport& r) {
  return r.missing > 0 ? std::numeric_limits<double>::infinity() : r.max_l2;
}

MomentErrors moment_errors(const MomentSet& truth, const MomentSet& estimate,
                           const std::vector<Vector>& probe_etas) {
  if (truth.d() != estimate.d())
    fail(ErrorCode::DimensionMismatch, "moment sets disagree on d");
  MomentErrors e;
  e.pairs = spectral_norm(truth.pairs - estimate.pairs);
  for (const auto& eta : probe_etas) {
    if (eta.size() != truth.d()) fail(ErrorCode::DimensionMismatch, "probe has the wrong length");
    const double nrm = eta.norm();
    if (!(nrm > 0.0)) continue;
    const Vector unit = eta / nrm;
    e.triples = std::max(
        e.triples, spectral_norm(truth.triples_contract(unit) - estimate.triples_contract(unit)));
  }
  return e;
}

std::vector<Vector> default_probe_etas(const MomentSet& truth, Eigen::Index k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> probes;
  for (int i = 0; i < 20; ++i) probes.push_back(random_unit_vector(truth.d(), rng));
  const WhiteningMap white = truncated_whiten(truth.pairs, k);
  const Vector theta = random_unit_vector(k, rng);
  const Matrix op = white.w.transpose() * truth.triples_contract(white.w * theta) * white.w;
  const SvdExtraction ext = unique_singular_vectors(op);
  for (const auto& v : ext.vectors) {
    Vector eta = white.w * v;
    probes.push_back(eta / eta.norm());
  }
  return probes;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  // Linear interpolation between order statistics.
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::DimensionMismatch, "log-log fit needs at least two paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

SweepResult sample_complexity_sweep(const std::vector<std::size_t>& ns, std::size_t trials,
                                    const TrialFunction& trial, std::uint64_t seed, int threads) {
  if (ns.empty() || trials == 0) fail(ErrorCode::InvalidOptions, "sweep needs Ns and trials");
  SweepResult out;
  for (std::size_t a = 0; a < ns.size(); ++a) {
    SweepRow row;
    row.n = ns[a];
    row.errors.assign(trials, 0.0);
    const std::uint64_t n_seed = derive_seed(seed, a);
    auto run = [&](std::size_t t) { row.errors[t] = trial(ns[a], t, derive_seed(n_seed, t)); };
    if (threads > 1) {
      // Batches of `threads` trials; results land in fixed slots.
      for (std::size_t start = 0; start < trials; start += static_cast<std::size_t>(threads)) {
        std::vector<std::future<void>> futures;
        const std::size_t end = std::min(trials, start + static_cast<std::size_t>(threads));
        for (std::size_t t = start; t < end; ++t) futures.push_back(std::async(std::launch::async, run, t));
        for (auto& f : futures) f.get();
      }
    } else {
      for (std::size_t t = 0; t < trials; ++t) run(t);
    }
    row.median = quantile(row.errors, 0.5);
    row.q1 = quantile(row.errors, 0.25);
    row.q3 = quantile(row.errors, 0.75);
    out.rows.push_back(std::move(row));
  }
  if (out.rows.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& r : out.rows) {
      x.push_back(static_cast<double>(r.n));
      y.push_back(r.median);
    }
    std::tie(out.slope, out.intercept) = loglog_fit(x, y);
  }
  return out;
}

}  // namespace eca
