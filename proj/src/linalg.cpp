#include "eca/linalg.hpp"

#include <cmath>

#include "eca/error.hpp"

namespace eca {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Vector random_unit_vector(Eigen::Index k, Rng& rng) {
  Vector v = random_gaussian(k, 1, rng);
  double n = v.norm();
  while (n == 0.0) {
    v = random_gaussian(k, 1, rng);
    n = v.norm();
  }
  return v / n;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix left_pseudo_inverse(const Matrix& a) {
  Matrix gram = a.transpose() * a;
  Eigen::LDLT<Matrix> ldlt(gram);
  const Vector pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || pivots.size() == 0 ||
      pivots.minCoeff() <= 1e-13 * pivots.cwiseAbs().maxCoeff())
    fail(ErrorCode::RankDeficient, "pseudo-inverse: columns are linearly dependent");
  return ldlt.solve(a.transpose());
}

Matrix orthonormalize(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

void fix_sign_largest_positive(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
}

}  // namespace eca
