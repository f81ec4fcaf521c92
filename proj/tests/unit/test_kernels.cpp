#include <doctest.h>

#include <cmath>
#include <random>

#include "taskqr/bench.hpp"
#include "taskqr/kernels.hpp"
#include "taskqr/oracle.hpp"

using namespace taskqr;

namespace {

// Dense matrix-vector product with an explicit reflector, kept separate from the
// row kernel so the two can be compared.
std::vector<double> apply_dense(const DenseMatrix& h, std::span<const double> x) {
  std::vector<double> y(h.rows(), 0.0);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t k = 0; k < h.cols(); ++k) y[i] += h(i, k) * x[k];
  }
  return y;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("update_pivot_row on [3, 4]") {
  DenseMatrix a(1, 2, {3.0, 4.0});
  const PivotResult r = update_pivot_row(a, 0);
  CHECK(r.defined);
  CHECK(r.up == 8.0);
  CHECK(r.b == -40.0);
  CHECK(a(0, 0) == -5.0);
  CHECK(a(0, 1) == 4.0);
}

TEST_CASE("update_pivot_row on a zero segment is undefined and leaves the matrix alone") {
  DenseMatrix a(1, 1, {0.0});
  const PivotResult r = update_pivot_row(a, 0);
  CHECK_FALSE(r.defined);
  CHECK(r.up == 0.0);
  CHECK(r.b == 0.0);
  CHECK(a(0, 0) == 0.0);
}

TEST_CASE("update_pivot_row with zero leading entry keeps a positive cl") {
  DenseMatrix a(1, 3, {0.0, 3.0, 4.0});
  const PivotResult r = update_pivot_row(a, 0);
  CHECK(r.defined);
  CHECK(r.up == -5.0);
  CHECK(r.b == -25.0);
  CHECK(a(0, 0) == 5.0);
  CHECK(a(0, 1) == 3.0);
  CHECK(a(0, 2) == 4.0);
}

TEST_CASE("update_pivot_row matches the explicit reflector") {
  DenseMatrix a(1, 3, {0.0, 3.0, 4.0});
  const DenseMatrix original = a;
  ReflectorStore store(1);
  store.set(0, update_pivot_row(a, 0));
  const DenseMatrix h = explicit_reflector(a, store, 0);
  // Reflecting the original row lands on (cl, 0, 0).
  const auto y = apply_dense(h, original.row(0));
  CHECK(y[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(y[1]) < 1e-14);
  CHECK(std::abs(y[2]) < 1e-14);
}

TEST_CASE("update_trailing_non_pivot_row worked example") {
  DenseMatrix a(2, 2, {-5.0, 4.0, 1.0, 2.0});
  update_trailing_non_pivot_row(a, 0, 1, 8.0, -40.0);
  CHECK(a(1, 0) == doctest::Approx(-2.2).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(0.4).epsilon(1e-15));

  // Explicit H = I - v v^T (2/|v|^2) with v = (8, 4) applied to (1, 2).
  const double v0 = 8.0, v1 = 4.0, f = 2.0 / (v0 * v0 + v1 * v1);
  CHECK(a(1, 0) == doctest::Approx(1.0 - f * v0 * (v0 * 1.0 + v1 * 2.0)).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(2.0 - f * v1 * (v0 * 1.0 + v1 * 2.0)).epsilon(1e-15));
}

TEST_CASE("update_trailing_non_pivot_row leaves a row orthogonal to v unchanged") {
  DenseMatrix a(2, 2, {-5.0, 4.0, 1.0, -2.0});
  update_trailing_non_pivot_row(a, 0, 1, 8.0, -40.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(1, 1) == -2.0);
}

TEST_CASE("update_trailing_non_pivot_row on a single column negates") {
  DenseMatrix a(2, 1, {2.0, 6.0});
  const PivotResult r = update_pivot_row(a, 0);
  CHECK(a(0, 0) == -2.0);
  CHECK(r.up == 4.0);
  CHECK(r.b == -8.0);
  update_trailing_non_pivot_row(a, 0, 1, r.up, r.b);
  CHECK(a(1, 0) == -6.0);
}

TEST_CASE("update_trailing_non_pivot_row rejects b == 0") {
  DenseMatrix a(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(update_trailing_non_pivot_row(a, 0, 1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sequential_factorize on the 2x2 worked example") {
  DenseMatrix a(2, 2, {3.0, 4.0, 1.0, 2.0});
  const ReflectorStore s = sequential_factorize(a);
  CHECK(a(0, 0) == -5.0);
  CHECK(a(0, 1) == 4.0);
  CHECK(a(1, 0) == doctest::Approx(-2.2).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(s.up(0) == 8.0);
  CHECK(s.b(0) == -40.0);
  CHECK(s.up(1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.b(1) == doctest::Approx(-0.32).epsilon(1e-15));
  CHECK(s.defined(0));
  CHECK(s.defined(1));
}

TEST_CASE("sequential_factorize on [1] and on zeros") {
  DenseMatrix one(1, 1, {1.0});
  const ReflectorStore s1 = sequential_factorize(one);
  CHECK(one(0, 0) == -1.0);
  CHECK(s1.up(0) == 2.0);
  CHECK(s1.b(0) == -2.0);

  DenseMatrix zero(2, 2);
  const ReflectorStore s0 = sequential_factorize(zero);
  CHECK_FALSE(s0.defined(0));
  CHECK_FALSE(s0.defined(1));
  CHECK(bitwise_equal(zero, DenseMatrix(2, 2)));
}

TEST_CASE("reconstruct_original inverts the factorization") {
  SUBCASE("2x2 worked example") {
    const DenseMatrix a(2, 2, {3.0, 4.0, 1.0, 2.0});
    DenseMatrix f = a;
    const ReflectorStore s = sequential_factorize(f);
    CHECK(relative_frobenius_error(reconstruct_original(f, s, 2), a) <= 1e-14);
  }
  SUBCASE("zero matrix reconstructs to exact zero") {
    DenseMatrix f(3, 3);
    const ReflectorStore s = sequential_factorize(f);
    CHECK(bitwise_equal(reconstruct_original(f, s, 3), DenseMatrix(3, 3)));
  }
  SUBCASE("random 16x16") {
    const DenseMatrix a = bench::gen_matrix(16, 16, 3);
    DenseMatrix f = a;
    const ReflectorStore s = sequential_factorize(f);
    CHECK(relative_frobenius_error(reconstruct_original(f, s, 16), a) <= 1e-12);
  }
  SUBCASE("non-square shapes") {
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{7, 4}, {4, 7}, {1, 5}, {5, 1}}) {
      const DenseMatrix a = bench::gen_matrix(m, n, 11);
      DenseMatrix f = a;
      const ReflectorStore s = sequential_factorize(f);
      CHECK(s.size() == std::min(m, n));
      CHECK(relative_frobenius_error(reconstruct_original(f, s, n), a) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(reconstruct_original(DenseMatrix(2, 2), ReflectorStore(2), 3),
                  std::invalid_argument);
}

TEST_CASE("per-pivot kernel identity |v|^2 = -2b and b < 0") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DenseMatrix f = bench::gen_matrix(24, 24, seed);
    const ReflectorStore s = sequential_factorize(f);
    for (std::size_t i = 0; i < s.size(); ++i) {
      REQUIRE(s.defined(i));
      CHECK(s.b(i) < 0.0);
      double v2 = s.up(i) * s.up(i);
      for (std::size_t k = i + 1; k < f.cols(); ++k) v2 += f(i, k) * f(i, k);
      CHECK(rel_diff(v2, -2.0 * s.b(i)) <= 1e-12);
    }
  }
}

TEST_CASE("trailing update agrees with the explicit reflector on every later row") {
  const DenseMatrix a = bench::gen_matrix(9, 9, 21);
  DenseMatrix f = a;
  for (std::size_t i = 0; i < 9; ++i) {
    const DenseMatrix before = f;
    const PivotResult r = update_pivot_row(f, i);
    REQUIRE(r.defined);
    for (std::size_t j = i + 1; j < 9; ++j) update_trailing_non_pivot_row(f, i, j, r.up, r.b);
    ReflectorStore s(9);
    s.set(i, r);
    const DenseMatrix h = explicit_reflector(f, s, i);
    for (std::size_t j = i + 1; j < 9; ++j) {
      const auto want = apply_dense(h, before.row(j));
      for (std::size_t k = 0; k < 9; ++k) CHECK(rel_diff(f(j, k), want[k]) <= 1e-13);
    }
  }
}

TEST_CASE("finite input stays finite, including extreme magnitudes") {
  DenseMatrix a = bench::gen_matrix(12, 12, 8);
  for (std::size_t k = 0; k < 12; ++k) {
    a(0, k) *= 1e100;
    a(5, k) *= 1e-100;
  }
  const DenseMatrix original = a;
  const ReflectorStore s = sequential_factorize(a);
  CHECK(a.all_finite());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::isfinite(s.b(i)));
  CHECK(original.all_finite());
}

TEST_CASE("DenseMatrix rejects bad shapes") {
  CHECK_THROWS_AS(DenseMatrix(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
}
