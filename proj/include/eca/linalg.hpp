#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace eca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (seed, stream); used to derive independent
/// per-shard / per-trial seeds from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Uniform draw on the unit sphere S^{k-1}.
Vector random_unit_vector(Eigen::Index k, Rng& rng);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// (A^T A)^{-1} A^T for A with linearly independent columns.
Matrix left_pseudo_inverse(const Matrix& a);

/// Thin Q factor of a Householder QR; column j spans the same nested
/// subspace as the first j+1 input columns.
Matrix orthonormalize(const Matrix& y);

/// Flip v so its largest-magnitude entry is positive.
void fix_sign_largest_positive(Eigen::Ref<Vector> v);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace eca
