#include "taskqr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <cstring>
#include <stdexcept>

#include "taskqr/kernels.hpp"

namespace taskqr::bench {

DenseMatrix gen_matrix(std::size_t m, std::size_t n, std::uint64_t seed, bool dominant) {
  DenseMatrix a(m, n);
  std::mt19937_64 engine(seed);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (double& v : a.data()) {
    const double unit = static_cast<double>(engine() >> 11) * kScale;
    v = 2.0 * unit - 1.0;
  }
  if (dominant) {
    for (std::size_t i = 0; i < std::min(m, n); ++i) a(i, i) += static_cast<double>(m);
  }
  return a;
}

std::vector<double> multiply(const DenseMatrix& a, const std::vector<double>& x) {
  if (x.size() != a.cols()) throw std::invalid_argument("multiply: length mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) acc += row[k] * x[k];
    y[i] = acc;
  }
  return y;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string describe_difference(const DenseMatrix& got, const ReflectorStore& got_store,
                                 const DenseMatrix& want, const ReflectorStore& want_store) {
  const std::size_t k = first_difference(got, want);
  if (k != want.data().size()) {
    return "matrix[" + std::to_string(k / want.cols()) + "," + std::to_string(k % want.cols()) +
           "] (flat index " + std::to_string(k) + ")";
  }
  for (std::size_t i = 0; i < want_store.size(); ++i) {
    if (got_store.defined(i) != want_store.defined(i)) return "defined[" + std::to_string(i) + "]";
    if (std::memcmp(&got_store.up_values()[i], &want_store.up_values()[i], sizeof(double)) != 0) {
      return "up[" + std::to_string(i) + "]";
    }
    if (std::memcmp(&got_store.b_values()[i], &want_store.b_values()[i], sizeof(double)) != 0) {
      return "b[" + std::to_string(i) + "]";
    }
  }
  return {};
}

std::size_t parse_count(std::string_view text, const char* what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
    throw std::invalid_argument(std::string(what) + ": expected a positive integer, got '" +
                                std::string(text) + "'");
  }
  return value;
}

}  // namespace

BenchRecord time_factorization(SchedulerKind kind, std::size_t m, std::size_t n,
                               std::size_t alpha, std::size_t beta, std::size_t threads,
                               std::uint64_t seed, const TimingOptions& opts) {
  if (opts.reps == 0) throw std::invalid_argument("time_factorization: reps must be >= 1");
  BenchRecord rec{kind, m, n, alpha, beta, threads, seed, opts.reps, 0.0, true};

  const DenseMatrix input = gen_matrix(m, n, seed);
  const TaskGraph graph = build_task_graph(m, n, alpha, beta);
  RunOptions run;
  run.threads = threads;

  std::optional<DenseMatrix> reference;
  std::optional<ReflectorStore> reference_store;
  if (opts.check) {
    reference = input;
    reference_store = sequential_factorize(*reference);
  }

  if (opts.warmup) {
    DenseMatrix scratch = input;
    ReflectorStore store(graph.grid().pivots);
    execute(kind, graph, scratch, store, run);
  }

  std::vector<double> seconds;
  for (std::size_t r = 0; r < opts.reps; ++r) {
    DenseMatrix work = input;
    ReflectorStore store(graph.grid().pivots);
    const auto start = std::chrono::steady_clock::now();
    execute(kind, graph, work, store, run);
    const auto stop = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(stop - start).count());
    if (opts.check) {
      rec.correct = rec.correct && bitwise_equal(work, *reference) &&
                    bitwise_equal(store, *reference_store);
    }
  }
  rec.median_seconds = opts.no_time ? 0.0 : median(seconds);
  return rec;
}

std::string CheckReport::summary() const {
  std::ostringstream out;
  if (ok()) {
    out << "check passed: " << runs << " runs bitwise identical to sequential_factorize";
  } else {
    const Mismatch& mm = *mismatch;
    out << "check FAILED after " << runs << " runs: scheduler=" << to_string(mm.scheduler)
        << " size=" << mm.size << " alpha=" << mm.alpha << " beta=" << mm.beta
        << " threads=" << mm.threads << " seed=" << mm.seed << " first difference at "
        << mm.where;
  }
  return out.str();
}

CheckReport run_check(const CheckGrid& grid, const Executor& executor) {
  const Executor exec = executor ? executor
                                 : Executor([](SchedulerKind k, const TaskGraph& g, DenseMatrix& a,
                                               ReflectorStore& s, const RunOptions& o) {
                                     execute(k, g, a, s, o);
                                   });
  CheckReport report;
  for (std::size_t size : grid.sizes) {
    for (std::uint64_t seed : grid.seeds) {
      const DenseMatrix input = gen_matrix(size, size, seed);
      DenseMatrix reference = input;
      const ReflectorStore reference_store = sequential_factorize(reference);
      for (std::size_t alpha : grid.alphas) {
        for (std::size_t beta : grid.betas) {
          const TaskGraph graph = build_task_graph(size, size, alpha, beta);
          for (std::size_t threads : grid.threads) {
            for (SchedulerKind kind : grid.schedulers) {
              DenseMatrix work = input;
              ReflectorStore store(graph.grid().pivots);
              RunOptions run;
              run.threads = threads;
              exec(kind, graph, work, store, run);
              ++report.runs;
              const std::string where = describe_difference(work, store, reference, reference_store);
              if (!where.empty()) {
                report.mismatch = Mismatch{kind, size, alpha, beta, threads, seed, where};
                return report;
              }
            }
          }
        }
      }
    }
  }
  return report;
}

std::vector<SweepRow> run_sweep(std::size_t size, std::size_t threads,
                                const std::vector<std::size_t>& alphas,
                                const std::vector<std::size_t>& betas, std::uint64_t seed,
                                const TimingOptions& opts) {
  std::vector<SweepRow> rows;
  for (SchedulerKind kind : {SchedulerKind::LockFree, SchedulerKind::Priority}) {
    for (std::size_t alpha : alphas) {
      for (std::size_t beta : betas) {
        const BenchRecord rec = time_factorization(kind, size, size, alpha, beta, threads, seed, opts);
        rows.push_back({kind, alpha, beta, rec.median_seconds, rec.correct});
      }
    }
  }
  return rows;
}

std::optional<SweepRow> sweep_argmin(const std::vector<SweepRow>& rows, SchedulerKind kind) {
  std::optional<SweepRow> best;
  for (const auto& r : rows) {
    if (r.scheduler != kind) continue;
    if (!best || r.median_seconds < best->median_seconds) best = r;
  }
  return best;
}

std::vector<ScaleRow> run_scale(const std::vector<std::size_t>& sizes, std::size_t alpha,
                                std::size_t beta, std::size_t threads, std::uint64_t seed,
                                const TimingOptions& opts) {
  std::vector<ScaleRow> rows;
  for (std::size_t size : sizes) {
    for (SchedulerKind kind :
         {SchedulerKind::Barrier, SchedulerKind::LockFree, SchedulerKind::Priority}) {
      const BenchRecord rec = time_factorization(kind, size, size, alpha, beta, threads, seed, opts);
      rows.push_back({kind, size, rec.median_seconds, rec.correct});
    }
  }
  return rows;
}

std::vector<ThroughputRow> run_throughput(std::size_t size, std::size_t alpha, std::size_t beta,
                                          const std::vector<std::size_t>& threads,
                                          std::uint64_t seed, const TimingOptions& opts) {
  std::vector<ThroughputRow> rows;
  for (std::size_t t : threads) {
    for (SchedulerKind kind :
         {SchedulerKind::Barrier, SchedulerKind::LockFree, SchedulerKind::Priority}) {
      const BenchRecord rec = time_factorization(kind, size, size, alpha, beta, t, seed, opts);
      rows.push_back({kind, t, rec.median_seconds, rec.correct});
    }
  }
  return rows;
}

namespace {

struct Seconds {
  double value;
};

std::ostream& operator<<(std::ostream& out, Seconds s) {
  std::ostringstream tmp;
  tmp << std::setprecision(9) << s.value;
  return out << tmp.str();
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "scheduler,alpha,beta,median_seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.scheduler) << ',' << r.alpha << ',' << r.beta << ','
        << Seconds{r.median_seconds} << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<ScaleRow>& rows) {
  out << "scheduler,size,median_seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.scheduler) << ',' << r.size << ',' << Seconds{r.median_seconds} << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<ThroughputRow>& rows) {
  out << "scheduler,threads,median_seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.scheduler) << ',' << r.threads << ',' << Seconds{r.median_seconds} << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << "scheduler,m,n,alpha,beta,threads,seed,reps,median_seconds,correct\n";
  for (const auto& r : rows) {
    out << to_string(r.scheduler) << ',' << r.m << ',' << r.n << ',' << r.alpha << ',' << r.beta
        << ',' << r.threads << ',' << r.seed << ',' << r.reps << ','
        << Seconds{r.median_seconds} << ',' << (r.correct ? "true" : "false") << '\n';
  }
}

std::vector<std::size_t> parse_range(const std::string& spec) {
  std::vector<std::string_view> parts;
  std::string_view rest(spec);
  for (std::size_t pos; (pos = rest.find(':')) != std::string_view::npos;) {
    parts.push_back(rest.substr(0, pos));
    rest.remove_prefix(pos + 1);
  }
  parts.push_back(rest);
  if (parts.size() < 2 || parts.size() > 3) {
    throw std::invalid_argument("range must look like lo:hi or lo:hi:step, got '" + spec + "'");
  }
  const std::size_t lo = parse_count(parts[0], "range start");
  const std::size_t hi = parse_count(parts[1], "range end");
  const std::size_t step = parts.size() == 3 ? parse_count(parts[2], "range step") : 1;
  if (hi < lo) throw std::invalid_argument("range end is below its start: '" + spec + "'");
  std::vector<std::size_t> out;
  for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& spec) {
  const auto x = spec.find_first_of("xX");
  if (x == std::string::npos) {
    const std::size_t m = parse_count(spec, "size");
    return {m, m};
  }
  return {parse_count(std::string_view(spec).substr(0, x), "size rows"),
          parse_count(std::string_view(spec).substr(x + 1), "size cols")};
}

}  // namespace taskqr::bench
