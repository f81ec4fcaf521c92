// Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion; exit status is
// nonzero when any selected criterion fails.
//
//   taskqr_acceptance [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support/graph_oracles.hpp"
#include "taskqr/bench.hpp"
#include "taskqr/kernels.hpp"
#include "taskqr/oracle.hpp"
#include "taskqr/schedulers.hpp"
#include "taskqr/solver.hpp"
#include "taskqr/task_graph.hpp"

using namespace taskqr;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kReconstructionTol = 1e-12;
constexpr double kOrthogonalityTol = 1e-12;
constexpr double kReflectorNormTol = 1e-12;
constexpr double kSolveDominantTol = 1e-10;
constexpr double kSolveExampleTol = 1e-14;
constexpr double kSpeedupRatio = 1.5;
constexpr double kScalingRatio = 0.6;
constexpr double kEquivalenceBudgetSeconds = 300.0;
constexpr double kNumericsBudgetSeconds = 60.0;
constexpr double kGraphBudgetSeconds = 60.0;
constexpr double kPerformanceBudgetSeconds = 120.0;

struct Outcome {
  enum Status { Pass, Fail, Skip } status;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t hardware_threads() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

Outcome equivalence() {
  const auto t0 = Clock::now();
  bench::CheckGrid grid;
  grid.seeds = {1, 2, 3};
  const auto report = bench::run_check(grid);
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << report.summary() << "; " << elapsed << " s (budget " << kEquivalenceBudgetSeconds << " s)";
  const bool ok = report.ok() && elapsed < kEquivalenceBudgetSeconds;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome numerics() {
  const auto t0 = Clock::now();
  double worst_rec = 0.0, worst_orth = 0.0, worst_v = 0.0;
  std::size_t cases = 0;
  for (std::size_t n : {1, 2, 3, 7, 16, 50, 128, 300}) {
    for (std::uint64_t seed : {1, 2}) {
      const DenseMatrix a = bench::gen_matrix(n, n, seed);
      DenseMatrix f = a;
      const ReflectorStore store = sequential_factorize(f);
      worst_rec = std::max(worst_rec, relative_frobenius_error(reconstruct_original(f, store, n), a));
      worst_orth = std::max(worst_orth, orthogonality_error(explicit_q(f, store)));
      for (std::size_t i = 0; i < store.size(); ++i) {
        if (!store.defined(i)) continue;
        double v2 = store.up(i) * store.up(i);
        for (std::size_t k = i + 1; k < n; ++k) v2 += f(i, k) * f(i, k);
        worst_v = std::max(worst_v, std::abs(v2 + 2.0 * store.b(i)) / std::abs(2.0 * store.b(i)));
      }
      ++cases;
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << cases << " matrices; reconstruction " << worst_rec << ", orthogonality " << worst_orth
    << ", |v|^2+2b " << worst_v << "; " << elapsed << " s";
  const bool ok = worst_rec <= kReconstructionTol && worst_orth <= kOrthogonalityTol &&
                  worst_v <= kReflectorNormTol && elapsed < kNumericsBudgetSeconds;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome solving() {
  const DenseMatrix a = bench::gen_matrix(100, 100, 1, true);
  const auto rhs = bench::multiply(a, std::vector<double>(100, 1.0));
  Factorization f{a, ReflectorStore(100)};
  RunOptions opts;
  opts.threads = std::min<std::size_t>(8, hardware_threads());
  f.store = factorize(f.mat, SchedulerKind::LockFree, 12, 12, opts);
  const auto x = solve(f, rhs);
  double err = 0.0;
  for (double v : x) err = std::max(err, std::abs(v - 1.0));

  Factorization small{DenseMatrix(2, 2, {3.0, 4.0, 1.0, 2.0}), ReflectorStore(2)};
  small.store = sequential_factorize(small.mat);
  const auto x2 = solve(small, std::vector{1.0, 1.0});
  const double err2 = std::max(std::abs(x2[0] + 1.0), std::abs(x2[1] - 1.0));

  std::ostringstream d;
  d << "dominant 100x100 max error " << err << "; 2x2 error " << err2;
  const bool ok = err <= kSolveDominantTol && err2 <= kSolveExampleTol;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome graph_properties() {
  const auto t0 = Clock::now();
  std::size_t graphs = 0;
  std::string problem;
  for (std::size_t m = 1; m <= 40 && problem.empty(); ++m) {
    for (std::size_t a = 1; a <= 8 && problem.empty(); ++a) {
      for (std::size_t b = 1; b <= 8 && problem.empty(); ++b) {
        const TaskGraph g = build_task_graph(m, m, a, b);
        const std::string where = " (m=" + std::to_string(m) + " alpha=" + std::to_string(a) +
                                  " beta=" + std::to_string(b) + ")";
        if (auto p = oracle::coverage_problem(g, m, m); !p.empty()) problem = p + where;
        else if (auto q = oracle::order_safety_problem(g); !q.empty()) problem = q + where;
        else {
          const auto [top, bottom] = oracle::relaxed_levels(g);
          for (TaskIndex t = 0; t < g.size(); ++t) {
            if (g.node(t).top_level != top[t] || g.node(t).bottom_level != bottom[t]) {
              problem = "levels of " + g.node(t).label() + where;
              break;
            }
          }
        }
        ++graphs;
      }
    }
  }

  // The 15-node triangular graph: T_{2,3} in one-based notation is T(1,2).
  const TaskGraph tri = build_task_graph(5, 5, 1, 1);
  const auto& parents = tri.node(*tri.trailing(1, 2)).parents;
  const std::set<TaskIndex> got(parents.begin(), parents.end());
  const std::set<TaskIndex> want{tri.diagonal(1), *tri.trailing(0, 2)};
  if (problem.empty() && tri.size() != 15) problem = "triangular graph has " + std::to_string(tri.size()) + " nodes";
  if (problem.empty() && got != want) problem = "triangular graph parents of T(1,2) differ";

  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << graphs << " graphs; " << (problem.empty() ? "no violations" : problem) << "; " << elapsed << " s";
  const bool ok = problem.empty() && elapsed < kGraphBudgetSeconds;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome liveness() {
  const TaskGraph g = build_task_graph(64, 64, 2, 2);
  const DenseMatrix a = bench::gen_matrix(64, 64, 1);
  std::size_t runs = 0, aborts = 0, counter_faults = 0, mismatches = 0;
  DenseMatrix ref = a;
  const ReflectorStore ref_store = sequential_factorize(ref);
  for (SchedulerKind k : {SchedulerKind::LockFree, SchedulerKind::Priority}) {
    for (int r = 0; r < 200; ++r) {
      DenseMatrix mat = a;
      ReflectorStore store(64);
      RunStats stats;
      RunOptions opts;
      opts.threads = 8;
      opts.stats = &stats;
      try {
        execute(k, g, mat, store, opts);
      } catch (const SchedulerStalled&) {
        ++aborts;
        continue;
      }
      ++runs;
      const auto one = [](const std::vector<int>& v) {
        return std::all_of(v.begin(), v.end(), [](int c) { return c == 1; });
      };
      if (!one(stats.main_pushes()) || !one(stats.flag_sets()) || !one(stats.executions()) ||
          stats.lease_violations() != 0)
        ++counter_faults;
      if (!bitwise_equal(mat, ref) || !bitwise_equal(store, ref_store)) ++mismatches;
    }
  }
  std::ostringstream d;
  d << runs << " completed runs, " << aborts << " watchdog aborts, " << counter_faults
    << " counter faults, " << mismatches << " result mismatches";
  const bool ok = aborts == 0 && counter_faults == 0 && mismatches == 0 && runs == 400;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

double median_time(SchedulerKind kind, std::size_t threads) {
  bench::TimingOptions opts;
  opts.reps = 5;
  opts.check = true;
  const auto rec = bench::time_factorization(kind, 2048, 2048, 12, 12, threads, 1, opts);
  if (!rec.correct) throw std::runtime_error(std::string(to_string(kind)) + " result differs from sequential");
  return rec.median_seconds;
}

Outcome performance() {
  const auto t0 = Clock::now();
  const std::size_t threads = std::min<std::size_t>(8, hardware_threads());
  const double barrier = median_time(SchedulerKind::Barrier, threads);
  const double lockfree = median_time(SchedulerKind::LockFree, threads);
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "threads=" << threads << " barrier " << barrier << " s, lockfree " << lockfree
    << " s, ratio " << barrier / lockfree << " (need >= " << kSpeedupRatio << "); " << elapsed << " s";
  const bool ok = lockfree <= barrier / kSpeedupRatio && elapsed < kPerformanceBudgetSeconds;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome scaling() {
  const std::size_t hw = hardware_threads();
  if (hw < 8) {
    return {Outcome::Skip, "only " + std::to_string(hw) + " hardware threads; need 8"};
  }
  const double t2 = median_time(SchedulerKind::LockFree, 2);
  const double t8 = median_time(SchedulerKind::LockFree, 8);
  std::ostringstream d;
  d << "t(2) " << t2 << " s, t(8) " << t8 << " s, ratio " << t8 / t2 << " (need <= " << kScalingRatio << ")";
  return {t8 <= kScalingRatio * t2 ? Outcome::Pass : Outcome::Fail, d.str()};
}

Outcome sweep_report() {
  // Desk-scale grid: every (alpha, beta) in 2:32:2 for both dual-queue schedulers.
  const auto range = bench::parse_range("2:32:2");
  bench::TimingOptions opts;
  opts.reps = 1;
  opts.check = true;
  const std::size_t threads = std::min<std::size_t>(8, hardware_threads());
  const auto rows = bench::run_sweep(256, threads, range, range, 1, opts);
  const std::size_t expected = 2 * range.size() * range.size();
  const bool all_correct = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.correct; });
  std::ostringstream d;
  d << rows.size() << "/" << expected << " cells at size 256";
  for (SchedulerKind k : {SchedulerKind::LockFree, SchedulerKind::Priority}) {
    if (const auto best = bench::sweep_argmin(rows, k)) {
      d << "; " << to_string(k) << " argmin alpha=" << best->alpha << " beta=" << best->beta << " ("
        << best->median_seconds << " s)";
    }
  }
  d << " [reported, not asserted]";
  const bool ok = rows.size() == expected && all_correct;
  return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"bitwise scheduler equivalence", equivalence},
    {"numerical validity", numerics},
    {"solve correctness", solving},
    {"graph properties", graph_properties},
    {"scheduler liveness and discipline", liveness},
    {"performance ordering", performance},
    {"thread scaling", scaling},
    {"sweep harness", sweep_report},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const long n = std::strtol(argv[++i], nullptr, 10);
      if (n < 1 || n > static_cast<long>(kCriteria.size())) {
        std::cerr << "unknown criterion " << argv[i] << "\n";
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::cerr << "usage: taskqr_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= kCriteria.size(); ++n) selected.push_back(n);
  }

  int failures = 0;
  for (std::size_t n : selected) {
    const auto& [name, fn] = kCriteria[n - 1];
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = out.status == Outcome::Pass ? "PASS" : out.status == Outcome::Skip ? "SKIP" : "FAIL";
    std::cout << tag << " criterion " << n << " (" << name << "): " << out.detail << std::endl;
    if (out.status == Outcome::Fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
