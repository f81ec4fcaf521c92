#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "taskqr/matrix.hpp"
#include "taskqr/schedulers.hpp"

namespace taskqr::bench {

/// Uniform entries in [-1, 1] from std::mt19937_64 seeded with `seed`, one draw
/// per element in row-major order: value = 2 * (draw >> 11) * 2^-53 - 1.
/// With `dominant`, m is added to each diagonal entry.
DenseMatrix gen_matrix(std::size_t m, std::size_t n, std::uint64_t seed, bool dominant = false);

/// A * x
std::vector<double> multiply(const DenseMatrix& a, const std::vector<double>& x);

struct BenchRecord {
  SchedulerKind scheduler = SchedulerKind::LockFree;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  double median_seconds = 0.0;
  bool correct = true;
};

struct TimingOptions {
  std::size_t reps = 3;
  bool check = false;    ///< compare each run bitwise against sequential_factorize
  bool no_time = false;  ///< report zero instead of measured time
  bool warmup = false;
};

/// Times `reps` factorizations of gen_matrix(m, n, seed) and reports the median.
/// Only the executor call is inside the clock.
BenchRecord time_factorization(SchedulerKind kind, std::size_t m, std::size_t n,
                               std::size_t alpha, std::size_t beta, std::size_t threads,
                               std::uint64_t seed, const TimingOptions& opts);

/// In-place factorization routine under test; defaults to taskqr::execute.
using Executor = std::function<void(SchedulerKind, const TaskGraph&, DenseMatrix&,
                                    ReflectorStore&, const RunOptions&)>;

struct CheckGrid {
  std::vector<std::size_t> sizes{5, 16, 64, 300};
  std::vector<std::size_t> alphas{1, 2, 3, 5, 12};
  std::vector<std::size_t> betas{1, 2, 3, 5, 12};
  std::vector<std::size_t> threads{1, 2, 4, 8};
  std::vector<SchedulerKind> schedulers{SchedulerKind::Barrier, SchedulerKind::LockFree,
                                        SchedulerKind::Priority};
  std::vector<std::uint64_t> seeds{1};
};

struct Mismatch {
  SchedulerKind scheduler;
  std::size_t size;
  std::size_t alpha;
  std::size_t beta;
  std::size_t threads;
  std::uint64_t seed;
  std::string where;  ///< "matrix[k]" or "up[i]", "b[i]", "defined[i]"
};

struct CheckReport {
  std::size_t runs = 0;
  std::optional<Mismatch> mismatch;
  bool ok() const noexcept { return !mismatch.has_value(); }
  std::string summary() const;
};

/// Runs every grid combination and stops at the first bitwise difference from
/// sequential_factorize.
CheckReport run_check(const CheckGrid& grid, const Executor& executor = {});

struct SweepRow {
  SchedulerKind scheduler;
  std::size_t alpha;
  std::size_t beta;
  double median_seconds;
  bool correct = true;
};

std::vector<SweepRow> run_sweep(std::size_t size, std::size_t threads,
                                const std::vector<std::size_t>& alphas,
                                const std::vector<std::size_t>& betas, std::uint64_t seed,
                                const TimingOptions& opts);

/// Fastest (alpha, beta) cell for one scheduler; first cell wins ties.
std::optional<SweepRow> sweep_argmin(const std::vector<SweepRow>& rows, SchedulerKind kind);

struct ScaleRow {
  SchedulerKind scheduler;
  std::size_t size;
  double median_seconds;
  bool correct = true;
};

std::vector<ScaleRow> run_scale(const std::vector<std::size_t>& sizes, std::size_t alpha,
                                std::size_t beta, std::size_t threads, std::uint64_t seed,
                                const TimingOptions& opts);

struct ThroughputRow {
  SchedulerKind scheduler;
  std::size_t threads;
  double median_seconds;
  bool correct = true;
};

std::vector<ThroughputRow> run_throughput(std::size_t size, std::size_t alpha, std::size_t beta,
                                          const std::vector<std::size_t>& threads,
                                          std::uint64_t seed, const TimingOptions& opts);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_csv(std::ostream& out, const std::vector<ScaleRow>& rows);
void write_csv(std::ostream& out, const std::vector<ThroughputRow>& rows);
void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows);

/// "lo:hi:step" -> {lo, lo+step, ..., <= hi}. Throws std::invalid_argument.
std::vector<std::size_t> parse_range(const std::string& spec);

/// "M" or "MxN". Throws std::invalid_argument.
std::pair<std::size_t, std::size_t> parse_size(const std::string& spec);

}  // namespace taskqr::bench
