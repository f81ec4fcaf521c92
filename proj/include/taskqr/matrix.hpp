#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace taskqr {

/// Row-major m x n matrix of doubles. Element (i, j) lives at offset i*n + j.
class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  static DenseMatrix identity(std::size_t n);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Byte-for-byte comparison, so -0.0 != 0.0 and identical NaN payloads compare equal.
bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) noexcept;

/// Index of the first element whose bytes differ, or rows*cols when equal.
std::size_t first_difference(const DenseMatrix& a, const DenseMatrix& b) noexcept;

double frobenius_norm(const DenseMatrix& a) noexcept;

/// Result of computing one pivot reflector. `defined` is false for an all-zero
/// pivot segment, in which case up and b are both zero.
struct PivotResult {
  double up = 0.0;
  double b = 0.0;
  bool defined = false;
};

/// Per-pivot reflector scalars kept next to the in-place factorization.
///
/// Slot i is written once, by whichever task computed pivot i. Distinct slots may
/// be written concurrently; the defined flags are bytes rather than a packed
/// vector<bool> for that reason.
class ReflectorStore {
 public:
  explicit ReflectorStore(std::size_t pivots);

  std::size_t size() const noexcept { return up_.size(); }

  void set(std::size_t i, const PivotResult& r) noexcept {
    up_[i] = r.up;
    b_[i] = r.b;
    defined_[i] = r.defined ? 1 : 0;
  }

  double up(std::size_t i) const noexcept { return up_[i]; }
  double b(std::size_t i) const noexcept { return b_[i]; }
  bool defined(std::size_t i) const noexcept { return defined_[i] != 0; }

  std::span<const double> up_values() const noexcept { return up_; }
  std::span<const double> b_values() const noexcept { return b_; }
  std::span<const std::uint8_t> defined_flags() const noexcept { return defined_; }

 private:
  std::vector<double> up_;
  std::vector<double> b_;
  std::vector<std::uint8_t> defined_;
};

bool bitwise_equal(const ReflectorStore& a, const ReflectorStore& b) noexcept;

}  // namespace taskqr
