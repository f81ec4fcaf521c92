#include "taskqr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace taskqr {

SingularMatrixError::SingularMatrixError(std::size_t pivot)
    : std::runtime_error("singular matrix: zero diagonal at pivot " + std::to_string(pivot)),
      pivot_(pivot) {}

namespace {

void require_square(const Factorization& fact, std::size_t len, const char* what) {
  if (fact.rows() != fact.cols()) {
    throw std::invalid_argument(std::string(what) + ": only square systems are supported");
  }
  if (len != fact.rows()) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

void apply_one(const Factorization& fact, std::size_t i, std::vector<double>& y) {
  if (!fact.store.defined(i)) return;
  const auto piv = fact.mat.row(i);
  const double up = fact.store.up(i);
  double sm = y[i] * up;
  for (std::size_t k = i + 1; k < y.size(); ++k) sm += y[k] * piv[k];
  if (sm == 0.0) return;
  const double s = sm / fact.store.b(i);
  y[i] += s * up;
  for (std::size_t k = i + 1; k < y.size(); ++k) y[k] += s * piv[k];
}

}  // namespace

std::vector<double> forward_substitute(const Factorization& fact, std::span<const double> rhs) {
  require_square(fact, rhs.size(), "forward_substitute");
  const std::size_t n = rhs.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = fact.mat.row(i);
    if (row[i] == 0.0) throw SingularMatrixError(i);
    double acc = rhs[i];
    for (std::size_t k = 0; k < i; ++k) acc -= row[k] * y[k];
    y[i] = acc / row[i];
  }
  return y;
}

std::vector<double> apply_reflectors_reverse(const Factorization& fact, std::span<const double> y) {
  if (y.size() != fact.cols()) {
    throw std::invalid_argument("apply_reflectors_reverse: length must equal column count");
  }
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = fact.store.size(); i-- > 0;) apply_one(fact, i, out);
  return out;
}

std::vector<double> apply_reflectors_forward(const Factorization& fact, std::span<const double> y) {
  if (y.size() != fact.cols()) {
    throw std::invalid_argument("apply_reflectors_forward: length must equal column count");
  }
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = 0; i < fact.store.size(); ++i) apply_one(fact, i, out);
  return out;
}

std::vector<double> solve(const Factorization& fact, std::span<const double> rhs) {
  return apply_reflectors_reverse(fact, forward_substitute(fact, rhs));
}

double condition_estimate(const Factorization& fact) {
  const std::size_t p = std::min(fact.rows(), fact.cols());
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p; ++i) {
    const double d = std::abs(fact.mat(i, i));
    hi = std::max(hi, d);
    lo = std::min(lo, d);
  }
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

}  // namespace taskqr
