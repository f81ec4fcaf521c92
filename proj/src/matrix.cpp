#include "taskqr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace taskqr {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) {
    throw std::invalid_argument("DenseMatrix: dimensions must be at least 1x1");
  }
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                                " elements, got " + std::to_string(data_.size()));
  }
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix eye(n, n);
  for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
  return eye;
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) noexcept {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

std::size_t first_difference(const DenseMatrix& a, const DenseMatrix& b) noexcept {
  const auto lhs = a.data();
  const auto rhs = b.data();
  const std::size_t n = std::min(lhs.size(), rhs.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (std::memcmp(&lhs[k], &rhs[k], sizeof(double)) != 0) return k;
  }
  return lhs.size() == rhs.size() ? lhs.size() : n;
}

double frobenius_norm(const DenseMatrix& a) noexcept {
  double sum = 0.0;
  for (double v : a.data()) sum += v * v;
  return std::sqrt(sum);
}

ReflectorStore::ReflectorStore(std::size_t pivots)
    : up_(pivots, 0.0), b_(pivots, 0.0), defined_(pivots, 0) {}

bool bitwise_equal(const ReflectorStore& a, const ReflectorStore& b) noexcept {
  if (a.size() != b.size()) return false;
  const std::size_t bytes = a.size() * sizeof(double);
  return std::memcmp(a.up_values().data(), b.up_values().data(), bytes) == 0 &&
         std::memcmp(a.b_values().data(), b.b_values().data(), bytes) == 0 &&
         std::memcmp(a.defined_flags().data(), b.defined_flags().data(), a.size()) == 0;
}

}  // namespace taskqr
