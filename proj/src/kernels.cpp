#include "taskqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taskqr {

PivotResult update_pivot_row(DenseMatrix& mat, std::size_t lpivot) {
  const std::size_t n = mat.cols();
  double* x = mat.row(lpivot).data();

  double cl0 = 0.0;
  for (std::size_t k = lpivot; k < n; ++k) cl0 = std::max(cl0, std::abs(x[k]));
  if (cl0 == 0.0) return {};

  double sm = 0.0;
  for (std::size_t k = lpivot; k < n; ++k) {
    const double scaled = x[k] / cl0;
    sm += scaled * scaled;
  }
  double cl = cl0 * std::sqrt(sm);
  if (x[lpivot] > 0.0) cl = -cl;

  const double up = x[lpivot] - cl;
  x[lpivot] = cl;
  return {up, up * cl, true};
}

void update_trailing_non_pivot_row(DenseMatrix& mat, std::size_t lpivot, std::size_t j,
                                   double up, double b) {
  if (b == 0.0) {
    throw std::invalid_argument("update_trailing_non_pivot_row: b must be nonzero");
  }
  const std::size_t n = mat.cols();
  const double* piv = mat.row(lpivot).data();
  double* row = mat.row(j).data();

  double sm = row[lpivot] * up;
  for (std::size_t k = lpivot + 1; k < n; ++k) sm += row[k] * piv[k];
  if (sm == 0.0) return;

  const double s = sm / b;
  row[lpivot] += s * up;
  for (std::size_t k = lpivot + 1; k < n; ++k) row[k] += s * piv[k];
}

ReflectorStore sequential_factorize(DenseMatrix& mat) {
  const std::size_t m = mat.rows();
  const std::size_t p = std::min(m, mat.cols());
  ReflectorStore store(p);
  for (std::size_t i = 0; i < p; ++i) {
    const PivotResult r = update_pivot_row(mat, i);
    store.set(i, r);
    if (!r.defined) continue;
    for (std::size_t j = i + 1; j < m; ++j) update_trailing_non_pivot_row(mat, i, j, r.up, r.b);
  }
  return store;
}

}  // namespace taskqr
