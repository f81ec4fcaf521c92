#pragma once

#include <cstddef>

#include "taskqr/matrix.hpp"

namespace taskqr {

/// Builds the Householder reflector for the row segment mat[lpivot, lpivot..n).
///
/// The reflector vector is v = (up, mat[lpivot, lpivot+1..n)): the diagonal slot is
/// overwritten with cl (the reflected value, sign opposite to the leading entry) and
/// the tail is left in place as the stored reflector tail. b = up*cl = -|v|^2/2.
/// An all-zero segment yields defined = false and leaves the matrix untouched.
PivotResult update_pivot_row(DenseMatrix& mat, std::size_t lpivot);

/// Applies the reflector of pivot `lpivot` to row j (lpivot < j < m), columns
/// lpivot..n. Throws std::invalid_argument when b == 0 (callers skip undefined pivots).
void update_trailing_non_pivot_row(DenseMatrix& mat, std::size_t lpivot, std::size_t j,
                                   double up, double b);

/// Reference in-place factorization: every pivot row in order, each followed by
/// the trailing update of all later rows. Afterwards the diagonal holds cl, the
/// strictly-lower part holds the triangular factor and the strictly-upper part of
/// each pivot row holds that pivot's reflector tail.
ReflectorStore sequential_factorize(DenseMatrix& mat);

}  // namespace taskqr
