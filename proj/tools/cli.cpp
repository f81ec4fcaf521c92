#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "taskqr/bench.hpp"
#include "taskqr/kernels.hpp"
#include "taskqr/schedulers.hpp"
#include "taskqr/solver.hpp"

namespace taskqr::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long long default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp<long long>(hw == 0 ? 1 : hw, 1, 8);
}

std::size_t positive(long long v, const char* what) {
  if (v <= 0) throw UsageError(std::string(what) + " must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> positives(const std::vector<long long>& vs, const char* what) {
  if (vs.empty()) throw UsageError(std::string(what) + " list is empty");
  std::vector<std::size_t> out;
  for (long long v : vs) out.push_back(positive(v, what));
  return out;
}

std::pair<std::size_t, std::size_t> size_of(const std::string& spec) {
  try {
    return bench::parse_size(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::size_t square_size_of(const std::string& spec) {
  const auto [m, n] = size_of(spec);
  if (m != n) throw UsageError("this subcommand needs a square size, got " + spec);
  return m;
}

std::vector<std::size_t> range_of(const std::string& spec) {
  try {
    return bench::parse_range(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

SchedulerKind scheduler_of(const std::string& name) {
  const auto kind = parse_scheduler(name);
  if (!kind) throw UsageError("unknown scheduler '" + name + "'");
  return *kind;
}

/// Writes to --out when given, otherwise to `fallback`.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw UsageError("cannot open " + path + " for writing");
  write(file);
}

struct Common {
  std::string size;
  long long alpha = 12;
  long long beta = 12;
  long long threads = default_threads();
  std::string scheduler = "lockfree";
  std::uint64_t seed = 1;
  long long reps = 3;
  bool check = false;
  std::string out;
  bool no_time = false;
};

void add_timing_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--reps", c.reps, "Timed repetitions (median reported)")->capture_default_str();
  cmd->add_flag("--check", c.check, "Compare every run bitwise against the sequential factorization");
  cmd->add_option("--out", c.out, "Write CSV here instead of stdout");
  cmd->add_flag("--no-time", c.no_time, "Report zero timings (for byte-stable output)");
  cmd->add_option("--seed", c.seed, "Matrix generator seed")->capture_default_str();
}

bench::TimingOptions timing_of(const Common& c) {
  bench::TimingOptions t;
  t.reps = positive(c.reps, "--reps");
  t.check = c.check;
  t.no_time = c.no_time;
  return t;
}

int cmd_factor(const Common& c, const std::string& trace_path, const std::string& dot_path,
               std::ostream& out) {
  const auto [m, n] = size_of(c.size.empty() ? "300" : c.size);
  const auto alpha = positive(c.alpha, "--alpha");
  const auto beta = positive(c.beta, "--beta");
  const auto threads = positive(c.threads, "--threads");
  const SchedulerKind kind = scheduler_of(c.scheduler);

  const auto rec = bench::time_factorization(kind, m, n, alpha, beta, threads, c.seed, timing_of(c));
  emit(c.out, out, [&](std::ostream& os) { bench::write_csv(os, std::vector{rec}); });

  if (!trace_path.empty() || !dot_path.empty()) {
    const TaskGraph graph = build_task_graph(m, n, alpha, beta);
    if (!dot_path.empty()) {
      emit(dot_path, out, [&](std::ostream& os) { write_dot(graph, os); });
    }
    if (!trace_path.empty()) {
      DenseMatrix a = bench::gen_matrix(m, n, c.seed);
      ReflectorStore store(graph.grid().pivots);
      TraceLog trace;
      RunOptions run;
      run.threads = threads;
      run.trace = &trace;
      execute(kind, graph, a, store, run);
      emit(trace_path, out, [&](std::ostream& os) { trace.write_csv(graph, os); });
    }
  }
  return rec.correct ? kSuccess : kCorrectnessFailure;
}

int cmd_solve(const Common& c, bool dominant, std::ostream& out) {
  const std::size_t n = square_size_of(c.size.empty() ? "100" : c.size);
  const auto alpha = positive(c.alpha, "--alpha");
  const auto beta = positive(c.beta, "--beta");
  const auto threads = positive(c.threads, "--threads");
  const SchedulerKind kind = scheduler_of(c.scheduler);

  const DenseMatrix a = bench::gen_matrix(n, n, c.seed, dominant);
  const std::vector<double> ones(n, 1.0);
  const std::vector<double> rhs = bench::multiply(a, ones);

  Factorization fact{a, ReflectorStore(n)};
  RunOptions run;
  run.threads = threads;
  fact.store = factorize(fact.mat, kind, alpha, beta, run);

  bool correct = true;
  if (c.check) {
    DenseMatrix reference = a;
    const ReflectorStore reference_store = sequential_factorize(reference);
    correct = bitwise_equal(reference, fact.mat) && bitwise_equal(reference_store, fact.store);
  }

  std::vector<double> x;
  try {
    x = solve(fact, rhs);
  } catch (const SingularMatrixError& e) {
    out << "error: " << e.what() << '\n';
    return kCorrectnessFailure;
  }
  const std::vector<double> ax = bench::multiply(a, x);
  double max_error = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_error = std::max(max_error, std::abs(x[i] - 1.0));
    residual = std::max(residual, std::abs(ax[i] - rhs[i]));
  }
  out << std::setprecision(6) << "scheduler=" << to_string(kind) << " n=" << n
      << " max_abs_error=" << max_error << " residual_inf=" << residual
      << " condition_estimate=" << condition_estimate(fact);
  if (c.check) out << " correct=" << (correct ? "true" : "false");
  out << '\n';
  if (!c.out.empty()) {
    emit(c.out, out, [&](std::ostream& os) {
      os << "index,value\n" << std::setprecision(17);
      for (std::size_t i = 0; i < n; ++i) os << i << ',' << x[i] << '\n';
    });
  }
  return correct ? kSuccess : kCorrectnessFailure;
}

int cmd_check(const std::vector<std::string>& sizes, const std::vector<long long>& alphas,
              const std::vector<long long>& betas, const std::vector<long long>& threads,
              const std::vector<std::string>& schedulers, const std::vector<std::uint64_t>& seeds,
              std::ostream& out) {
  bench::CheckGrid grid;
  grid.sizes.clear();
  for (const auto& s : sizes) grid.sizes.push_back(square_size_of(s));
  grid.alphas = positives(alphas, "--alpha");
  grid.betas = positives(betas, "--beta");
  grid.threads = positives(threads, "--threads");
  grid.schedulers.clear();
  for (const auto& s : schedulers) grid.schedulers.push_back(scheduler_of(s));
  grid.seeds = seeds;
  if (grid.sizes.empty() || grid.schedulers.empty() || grid.seeds.empty()) {
    throw UsageError("check grid is empty");
  }
  const bench::CheckReport report = bench::run_check(grid);
  out << report.summary() << '\n';
  return report.ok() ? kSuccess : kCorrectnessFailure;
}

template <class Rows>
bool all_correct(const Rows& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.correct; });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task-graph scheduled in-place Householder factorization: checks and benchmarks",
               "taskqr"};
  app.require_subcommand(1);

  Common c;
  std::string trace_path;
  std::string dot_path;
  bool dominant = false;

  auto* factor = app.add_subcommand("factor", "Time one factorization and print its record as CSV");
  factor->add_option("--size", c.size, "M or MxN (default 300)");
  factor->add_option("--alpha", c.alpha, "Pivots per diagonal task")->capture_default_str();
  factor->add_option("--beta", c.beta, "Rows per trailing task")->capture_default_str();
  factor->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
  factor->add_option("--scheduler", c.scheduler, "seq, barrier, lockfree or priority")
      ->capture_default_str();
  factor->add_option("--trace", trace_path, "Write a per-task execution trace CSV");
  factor->add_option("--dot", dot_path, "Write the task graph in DOT format");
  add_timing_flags(factor, c);

  auto* solve_cmd = app.add_subcommand("solve", "Factor, then solve A x = A * ones");
  solve_cmd->add_option("--size", c.size, "M (default 100)");
  solve_cmd->add_option("--alpha", c.alpha)->capture_default_str();
  solve_cmd->add_option("--beta", c.beta)->capture_default_str();
  solve_cmd->add_option("--threads", c.threads)->capture_default_str();
  solve_cmd->add_option("--scheduler", c.scheduler)->capture_default_str();
  solve_cmd->add_option("--seed", c.seed)->capture_default_str();
  solve_cmd->add_flag("--dominant", dominant, "Add m to the diagonal");
  solve_cmd->add_flag("--check", c.check, "Compare the factorization against the sequential one");
  solve_cmd->add_option("--out", c.out, "Write the solution vector as CSV");

  std::vector<std::string> check_sizes{"5", "16", "64", "300"};
  std::vector<long long> check_alphas{1, 2, 3, 5, 12};
  std::vector<long long> check_betas{1, 2, 3, 5, 12};
  std::vector<long long> check_threads{1, 2, 4, 8};
  std::vector<std::string> check_schedulers{"barrier", "lockfree", "priority"};
  std::vector<std::uint64_t> check_seeds{1};
  auto* check = app.add_subcommand("check", "Bitwise equivalence of every scheduler against the sequential oracle");
  check->add_option("--size", check_sizes, "Square sizes")->capture_default_str();
  check->add_option("--alpha", check_alphas)->capture_default_str();
  check->add_option("--beta", check_betas)->capture_default_str();
  check->add_option("--threads", check_threads)->capture_default_str();
  check->add_option("--scheduler", check_schedulers)->capture_default_str();
  check->add_option("--seed", check_seeds)->capture_default_str();

  std::string alpha_range = "2:32:2";
  std::string beta_range = "2:32:2";
  auto* sweep = app.add_subcommand("sweep", "Time every (alpha, beta) cell for lockfree and priority");
  sweep->add_option("--size", c.size, "M (default 1024)");
  sweep->add_option("--threads", c.threads)->capture_default_str();
  sweep->add_option("--alpha-range", alpha_range, "lo:hi:step")->capture_default_str();
  sweep->add_option("--beta-range", beta_range, "lo:hi:step")->capture_default_str();
  add_timing_flags(sweep, c);

  std::vector<std::string> scale_sizes{"300", "512", "1024", "2048"};
  auto* scale = app.add_subcommand("scale", "Time barrier, lockfree and priority across sizes");
  scale->add_option("--size", scale_sizes)->capture_default_str();
  scale->add_option("--alpha", c.alpha)->capture_default_str();
  scale->add_option("--beta", c.beta)->capture_default_str();
  scale->add_option("--threads", c.threads)->capture_default_str();
  add_timing_flags(scale, c);

  std::vector<long long> tp_threads{1, 2, 4, 8};
  std::string threads_range;
  auto* throughput = app.add_subcommand("throughput", "Time the three schedulers across thread counts");
  throughput->add_option("--size", c.size, "M (default 2048)");
  throughput->add_option("--alpha", c.alpha)->capture_default_str();
  throughput->add_option("--beta", c.beta)->capture_default_str();
  auto* tp_threads_opt = throughput->add_option("--threads", tp_threads)->capture_default_str();
  throughput->add_option("--threads-range", threads_range, "lo:hi:step")->excludes(tp_threads_opt);
  add_timing_flags(throughput, c);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*factor) return cmd_factor(c, trace_path, dot_path, out);
    if (*solve_cmd) return cmd_solve(c, dominant, out);
    if (*check) {
      return cmd_check(check_sizes, check_alphas, check_betas, check_threads, check_schedulers,
                       check_seeds, out);
    }
    const auto threads = positive(c.threads, "--threads");
    const auto timing = timing_of(c);
    if (*sweep) {
      const std::size_t size = square_size_of(c.size.empty() ? "1024" : c.size);
      const auto rows = bench::run_sweep(size, threads, range_of(alpha_range), range_of(beta_range),
                                         c.seed, timing);
      emit(c.out, out, [&](std::ostream& os) { bench::write_csv(os, rows); });
      for (SchedulerKind kind : {SchedulerKind::LockFree, SchedulerKind::Priority}) {
        if (const auto best = bench::sweep_argmin(rows, kind)) {
          err << "argmin " << to_string(kind) << ": alpha=" << best->alpha
              << " beta=" << best->beta << " median_seconds=" << best->median_seconds << '\n';
        }
      }
      return all_correct(rows) ? kSuccess : kCorrectnessFailure;
    }
    if (*scale) {
      std::vector<std::size_t> sizes;
      for (const auto& s : scale_sizes) sizes.push_back(square_size_of(s));
      const auto rows = bench::run_scale(sizes, positive(c.alpha, "--alpha"),
                                         positive(c.beta, "--beta"), threads, c.seed, timing);
      emit(c.out, out, [&](std::ostream& os) { bench::write_csv(os, rows); });
      return all_correct(rows) ? kSuccess : kCorrectnessFailure;
    }
    if (*throughput) {
      const std::size_t size = square_size_of(c.size.empty() ? "2048" : c.size);
      const auto thread_list =
          threads_range.empty() ? positives(tp_threads, "--threads") : range_of(threads_range);
      const auto rows = bench::run_throughput(size, positive(c.alpha, "--alpha"),
                                              positive(c.beta, "--beta"), thread_list, c.seed, timing);
      emit(c.out, out, [&](std::ostream& os) { bench::write_csv(os, rows); });
      return all_correct(rows) ? kSuccess : kCorrectnessFailure;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace taskqr::cli
