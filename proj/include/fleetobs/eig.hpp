#pragma once

#include <complex>
#include <vector>

#include "fleetobs/matrix.hpp"

namespace fleetobs {

// Reduce a (copy of a) square matrix to upper Hessenberg form by Householder
// similarity transforms. Entries below the first subdiagonal are zeroed.
Matrix hessenberg(Matrix a);

// All eigenvalues of a real square matrix: Hessenberg reduction followed by
// Francis double-shift QR with deflation. Throws std::runtime_error if the
// iteration fails to converge (30 sweeps per eigenvalue).
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// max_i |lambda_i|.
double spectral_radius(const Matrix& a);

// Largest singular value, computed as sqrt of the top eigenvalue of the
// Gram matrix A^T A (symmetric PSD, so the QR iteration is reliable).
double two_norm(const Matrix& a);

}  // namespace fleetobs
