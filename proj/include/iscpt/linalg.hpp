#pragma once

#include <optional>

#include <Eigen/Eigenvalues>

#include "iscpt/types.hpp"

namespace iscpt {

/// Real symmetric image [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
///
/// Every eigenvalue of H appears twice in the image, H >= 0 iff the image is,
/// and tr(image) = 2 tr(H).
MatrixXd embed_hermitian(const MatrixXcd& h);

/// Inverse of embed_hermitian. The two diagonal blocks (and the two
/// off-diagonal blocks) are averaged, which projects an arbitrary symmetric
/// matrix onto the image.
MatrixXcd extract_hermitian(const MatrixXd& x);

struct HermitianEig {
  VectorXd values;    // ascending
  MatrixXcd vectors;  // unitary columns
};

HermitianEig hermitian_eig(const MatrixXcd& h);

/// V with w = V V^H keeping eigenpairs above tol * lambda_max, largest first.
MatrixXcd low_rank_factor(const MatrixXcd& w, double tol = 1e-6);

/// Number of eigenvalues above tol * lambda_max (0 for the zero matrix).
int numerical_rank(const MatrixXcd& w, double tol = 1e-6);

/// lambda_2 / lambda_1 of a PSD matrix (0 when rank <= 1).
double eigen_ratio(const MatrixXcd& w);

/// Unit null vector of a real linear map, or nullopt when its smallest
/// singular value exceeds 1e-9 * sigma_max. The sign is fixed so that the
/// first nonzero entry is positive.
std::optional<VectorXd> nullspace_vector(const MatrixXd& map);

/// Validates Hermitian symmetry to a relative tolerance.
bool is_hermitian(const MatrixXcd& h, double tol = 1e-10);

}  // namespace iscpt
