#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "taskqr/matrix.hpp"

namespace taskqr {

/// In-place factorization plus its reflector scalars: A = L * H_{p-1} ... H_0.
struct Factorization {
  DenseMatrix mat;
  ReflectorStore store;

  std::size_t rows() const noexcept { return mat.rows(); }
  std::size_t cols() const noexcept { return mat.cols(); }
};

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(std::size_t pivot);
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Solves L y = rhs by forward substitution over the diagonal and strictly-lower
/// part of the factorized matrix. Square systems only.
std::vector<double> forward_substitute(const Factorization& fact, std::span<const double> rhs);

/// H_0 H_1 ... H_{p-1} y, applying the last reflector first. Reflectors are
/// rebuilt from up/b and the tails stored in each pivot row.
std::vector<double> apply_reflectors_reverse(const Factorization& fact, std::span<const double> y);

/// H_{p-1} ... H_1 H_0 y, the inverse of apply_reflectors_reverse.
std::vector<double> apply_reflectors_forward(const Factorization& fact, std::span<const double> y);

/// x with A x = rhs.
std::vector<double> solve(const Factorization& fact, std::span<const double> rhs);

/// max |cl| / min |cl| over the diagonal; infinity when a diagonal entry is zero.
double condition_estimate(const Factorization& fact);

}  // namespace taskqr
