#pragma once

#include <cstddef>

#include "taskqr/matrix.hpp"

namespace taskqr {

// Explicit-matrix reference path. Nothing here calls into the row kernels: every
// reflector is materialized as a dense n x n matrix H = I - v v^T (2 / |v|^2) and
// combined with ordinary matrix products.

/// Dense reflector for pivot i of a factorized matrix; the identity when pivot i
/// is undefined.
DenseMatrix explicit_reflector(const DenseMatrix& factored, const ReflectorStore& store,
                               std::size_t i);

/// Q = H_{p-1} ... H_1 H_0, so that the original matrix equals L * Q.
DenseMatrix explicit_q(const DenseMatrix& factored, const ReflectorStore& store);

/// Triangular factor: diagonal and strictly-lower entries of the factorized matrix.
DenseMatrix lower_factor(const DenseMatrix& factored);

/// L * H_{p-1} ... H_0, which reproduces the matrix that was factorized.
DenseMatrix reconstruct_original(const DenseMatrix& factored, const ReflectorStore& store,
                                 std::size_t original_n);

/// max |(Q Q^T - I)_{ij}|
double orthogonality_error(const DenseMatrix& q);

/// |a - b|_F / |b|_F, or |a - b|_F when b is zero.
double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace taskqr
