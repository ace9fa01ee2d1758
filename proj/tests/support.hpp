#pragma once

#include <cmath>
#include <vector>

#include "eca/linalg.hpp"

namespace eca::test {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Brute-force oracles, deliberately written without the library's shortcuts.

/// E[prod_i h_i^{n_i}] for h ~ Dir(alpha), from the Gamma-function identity.
inline double dirichlet_monomial(const Vector& alpha, const std::vector<int>& powers) {
  double log_val = std::lgamma(alpha.sum());
  int total = 0;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double a = alpha(static_cast<Eigen::Index>(i));
    log_val += std::lgamma(a + powers[i]) - std::lgamma(a);
    total += powers[i];
  }
  return std::exp(log_val - std::lgamma(alpha.sum() + total));
}

/// Per-document E over ordered distinct positions (p, q, r) of x_p x_q^T <eta, x_r>.
inline Matrix brute_triples(const std::vector<int>& tokens, Eigen::Index d, const Vector& eta) {
  Matrix m = Matrix::Zero(d, d);
  const std::size_t n = tokens.size();
  double count = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r) {
        if (p == q || q == r || p == r) continue;
        m(tokens[p], tokens[q]) += eta(tokens[r]);
        count += 1;
      }
  return m / count;
}

inline Matrix brute_pairs(const std::vector<int>& tokens, Eigen::Index d) {
  Matrix m = Matrix::Zero(d, d);
  const std::size_t n = tokens.size();
  double count = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      m(tokens[p], tokens[q]) += 1;
      count += 1;
    }
  return m / count;
}

}  // namespace eca::test
