#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace mjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Kronecker product, size (rA*rB) x (cA*cB).
Matrix kron(const Matrix& a, const Matrix& b);

/// Block-diagonal assembly. Throws InvalidInput on a non-square block.
Matrix block_diag(std::span<const Matrix> blocks);

/// Largest eigenvalue modulus of a general real square matrix.
///
/// Backed by a Hessenberg reduction followed by shifted QR iterations.
/// Throws NumericalError if the iteration does not converge.
double spectral_radius(const Matrix& m);

/// (M + M') / 2
Matrix symmetrize(const Matrix& m);

/// Smallest eigenvalue of the symmetrized matrix.
double min_eig_symmetric(const Matrix& m);

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
Matrix expm(const Matrix& m);

/// Largest absolute entry.
double sup_norm(const Matrix& m);

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double sym_spectral_norm(const Matrix& m);

}  // namespace mjls
