#include "taskqr/schedulers.hpp"

#include <tbb/concurrent_priority_queue.h>
#include <tbb/concurrent_queue.h>

#include <algorithm>
#include <barrier>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "taskqr/kernels.hpp"

namespace taskqr {

std::string_view to_string(SchedulerKind kind) noexcept {
  switch (kind) {
    case SchedulerKind::Sequential:
      return "seq";
    case SchedulerKind::Barrier:
      return "barrier";
    case SchedulerKind::LockFree:
      return "lockfree";
    case SchedulerKind::Priority:
      return "priority";
  }
  return "unknown";
}

std::optional<SchedulerKind> parse_scheduler(std::string_view name) noexcept {
  if (name == "seq" || name == "sequential") return SchedulerKind::Sequential;
  if (name == "barrier") return SchedulerKind::Barrier;
  if (name == "lockfree") return SchedulerKind::LockFree;
  if (name == "priority") return SchedulerKind::Priority;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Instrumentation

void RunStats::reset(const TaskGraph& graph, std::size_t rows) {
  const std::size_t n = graph.size();
  main_pushes_ = std::vector<std::atomic<int>>(n);
  flag_sets_ = std::vector<std::atomic<int>>(n);
  executions_ = std::vector<std::atomic<int>>(n);
  pivot_writes_ = std::vector<std::atomic<int>>(graph.grid().pivots);
  row_owner_ = std::vector<std::atomic<std::int64_t>>(rows);
  for (auto& o : row_owner_) o.store(-1, std::memory_order_relaxed);
  rendezvous_ = 0;
  lease_violations_ = 0;
  std::lock_guard lock(events_mutex_);
  events_.clear();
}

std::vector<int> RunStats::snapshot(const std::vector<std::atomic<int>>& v) {
  std::vector<int> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](const auto& a) { return a.load(); });
  return out;
}

std::vector<RunStats::QueueEvent> RunStats::queue_events() const {
  std::lock_guard lock(events_mutex_);
  return events_;
}

void RunStats::on_main_push(TaskIndex t) {
  main_pushes_[t].fetch_add(1, std::memory_order_relaxed);
  if (record_queue_events) {
    std::lock_guard lock(events_mutex_);
    events_.push_back({true, t});
  }
}

void RunStats::on_main_pop(TaskIndex t) {
  executions_[t].fetch_add(1, std::memory_order_relaxed);
  if (record_queue_events) {
    std::lock_guard lock(events_mutex_);
    events_.push_back({false, t});
  }
}

void RunStats::acquire_rows(TaskIndex t, Range rows) {
  for (std::size_t r = rows.begin; r < rows.end; ++r) {
    std::int64_t expected = -1;
    if (!row_owner_[r].compare_exchange_strong(expected, static_cast<std::int64_t>(t))) {
      lease_violations_.fetch_add(1);
    }
  }
}

void RunStats::release_rows(Range rows) {
  for (std::size_t r = rows.begin; r < rows.end; ++r) row_owner_[r].store(-1);
}

void TraceLog::reset(std::size_t workers) { per_worker_.assign(workers, {}); }

std::vector<TraceEvent> TraceLog::events() const {
  std::vector<TraceEvent> all;
  for (const auto& w : per_worker_) all.insert(all.end(), w.begin(), w.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.start_ns < b.start_ns; });
  return all;
}

void TraceLog::write_csv(const TaskGraph& graph, std::ostream& out) const {
  const auto all = events();
  const std::int64_t origin = all.empty() ? 0 : all.front().start_ns;
  out << "worker,task,label,start_ns,end_ns\n";
  for (const auto& e : all) {
    out << e.worker << ',' << e.task << ',' << graph.node(e.task).label() << ','
        << (e.start_ns - origin) << ',' << (e.end_ns - origin) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Task bodies

void run_task1(DenseMatrix& mat, ReflectorStore& store, const TaskNode& node, RunStats* stats) {
  for (std::size_t lpivot = node.pivots.begin; lpivot < node.pivots.end; ++lpivot) {
    const PivotResult r = update_pivot_row(mat, lpivot);
    if (stats) stats->on_pivot(lpivot);
    store.set(lpivot, r);
    if (!r.defined) continue;
    for (std::size_t j = lpivot + 1; j < node.rows.end; ++j) {
      update_trailing_non_pivot_row(mat, lpivot, j, r.up, r.b);
    }
  }
}

void run_task2(DenseMatrix& mat, ReflectorStore& store, const TaskNode& node) {
  for (std::size_t lpivot = node.pivots.begin; lpivot < node.pivots.end; ++lpivot) {
    if (!store.defined(lpivot)) continue;
    const double up = store.up(lpivot);
    const double b = store.b(lpivot);
    for (std::size_t j = node.rows.begin; j < node.rows.end; ++j) {
      update_trailing_non_pivot_row(mat, lpivot, j, up, b);
    }
  }
}

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Shared state of one executor run.
struct RunContext {
  const TaskGraph& graph;
  DenseMatrix& mat;
  ReflectorStore& store;
  const RunOptions& opts;

  void run_node(std::size_t worker, TaskIndex t) {
    const TaskNode& node = graph.nodes()[t];
    const std::int64_t start = opts.trace ? now_ns() : 0;
    if (opts.stats) opts.stats->acquire_rows(t, node.rows);
    if (node.kind == TaskKind::Diagonal) {
      run_task1(mat, store, node, opts.stats);
    } else {
      run_task2(mat, store, node);
    }
    if (opts.stats) opts.stats->release_rows(node.rows);
    if (opts.trace) opts.trace->record(worker, {worker, t, start, now_ns()});
  }
};

void check_shapes(const TaskGraph& graph, const DenseMatrix& mat, const ReflectorStore& store,
                  const RunOptions& opts) {
  const ChunkGrid& g = graph.grid();
  if (g.rows != mat.rows() || g.pivots != std::min(mat.rows(), mat.cols())) {
    throw std::invalid_argument("executor: task graph does not match the matrix shape");
  }
  if (store.size() != g.pivots) {
    throw std::invalid_argument("executor: reflector store must hold min(m, n) pivots");
  }
  if (opts.threads == 0) throw std::invalid_argument("executor: threads must be >= 1");
}

void prepare(const TaskGraph& graph, const DenseMatrix& mat, const RunOptions& opts) {
  if (opts.stats) opts.stats->reset(graph, mat.rows());
  if (opts.trace) opts.trace->reset(std::max<std::size_t>(opts.threads, 1));
}

class FifoQueue {
 public:
  explicit FifoQueue(const TaskGraph&) {}
  void push(TaskIndex t) { q_.push(t); }
  bool try_pop(TaskIndex& t) { return q_.try_pop(t); }

 private:
  tbb::concurrent_queue<TaskIndex> q_;
};

/// Pops the task with the highest priority, ties resolved by tie_break_before().
class PriorityQueue {
 public:
  explicit PriorityQueue(const TaskGraph& graph) : rank_(graph.size()) {
    const auto order = graph.priority_order();
    for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
  }
  void push(TaskIndex t) { q_.push({rank_[t], t}); }
  bool try_pop(TaskIndex& t) {
    Entry e;
    if (!q_.try_pop(e)) return false;
    t = e.task;
    return true;
  }

 private:
  struct Entry {
    std::size_t rank = 0;
    TaskIndex task = 0;
  };
  struct LowerRankFirst {
    bool operator()(const Entry& a, const Entry& b) const noexcept { return a.rank > b.rank; }
  };
  std::vector<std::size_t> rank_;
  tbb::concurrent_priority_queue<Entry, LowerRankFirst> q_;
};

template <class MainQueue>
void run_dual_queue(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                    const RunOptions& opts) {
  check_shapes(graph, mat, store, opts);
  prepare(graph, mat, opts);

  RunContext ctx{graph, mat, store, opts};
  const auto& nodes = graph.nodes();
  const std::size_t total = nodes.size();
  RunStats* stats = opts.stats;

  // Dependency table: written once per task with release, read with acquire.
  std::vector<std::atomic<std::uint8_t>> done(total);
  std::atomic<std::size_t> completed{0};
  std::atomic<std::int64_t> last_progress{now_ns()};
  std::atomic<bool> aborted{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  MainQueue main_queue(graph);
  tbb::concurrent_queue<TaskIndex> wait_queue;

  auto parents_done = [&](TaskIndex t) {
    for (TaskIndex p : nodes[t].parents) {
      if (done[p].load(std::memory_order_acquire) == 0) return false;
    }
    return true;
  };
  auto push_main = [&](TaskIndex t) {
    if (stats) stats->on_main_push(t);
    main_queue.push(t);
  };

  push_main(graph.root());
  const std::int64_t watchdog_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(opts.watchdog).count();

  auto worker = [&](std::size_t id) {
    unsigned idle_rounds = 0;
    while (completed.load(std::memory_order_acquire) < total &&
           !aborted.load(std::memory_order_relaxed)) {
      bool progressed = false;
      TaskIndex t;
      if (main_queue.try_pop(t)) {
        if (stats) stats->on_main_pop(t);
        try {
          ctx.run_node(id, t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          aborted.store(true);
          return;
        }
        if (stats) stats->on_flag_set(t);
        done[t].store(1, std::memory_order_release);
        completed.fetch_add(1, std::memory_order_acq_rel);
        last_progress.store(now_ns(), std::memory_order_relaxed);
        for (TaskIndex child : nodes[t].releases) {
          if (parents_done(child)) {
            push_main(child);
          } else {
            wait_queue.push(child);
          }
        }
        progressed = true;
      }

      TaskIndex deferred = 0;
      if (wait_queue.try_pop(deferred)) {
        if (parents_done(deferred)) {
          push_main(deferred);
          progressed = true;
        } else {
          wait_queue.push(deferred);
        }
      }

      if (progressed) {
        idle_rounds = 0;
        continue;
      }
      ++idle_rounds;
      if (idle_rounds < 256) {
        std::this_thread::yield();
      } else {
        std::this_thread::sleep_for(std::chrono::microseconds(20));
      }
      if (idle_rounds % 64 == 0 &&
          now_ns() - last_progress.load(std::memory_order_relaxed) > watchdog_ns) {
        aborted.store(true);
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(opts.threads);
    for (std::size_t w = 0; w < opts.threads; ++w) pool.emplace_back(worker, w);
  }

  if (failure) std::rethrow_exception(failure);
  if (completed.load() != total) {
    std::ostringstream dump;
    dump << "dual-queue scheduler stalled: " << completed.load() << "/" << total
         << " tasks completed within the " << opts.watchdog.count() << " ms watchdog window";
    std::vector<TaskIndex> waiting;
    TaskIndex t;
    while (wait_queue.try_pop(t)) waiting.push_back(t);
    std::vector<TaskIndex> ready;
    while (main_queue.try_pop(t)) ready.push_back(t);
    auto list = [&](const char* name, const std::vector<TaskIndex>& ids) {
      dump << "\n  " << name << " (" << ids.size() << "):";
      for (std::size_t k = 0; k < ids.size() && k < 32; ++k) dump << ' ' << nodes[ids[k]].label();
    };
    list("main_queue", ready);
    list("wait_queue", waiting);
    std::vector<TaskIndex> pending;
    for (TaskIndex k = 0; k < total; ++k) {
      if (done[k].load() == 0) pending.push_back(k);
    }
    list("unfinished", pending);
    throw SchedulerStalled(dump.str());
  }
}

}  // namespace

void run_sequential(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                    const RunOptions& opts) {
  check_shapes(graph, mat, store, opts);
  prepare(graph, mat, opts);
  RunContext ctx{graph, mat, store, opts};
  for (TaskIndex t : graph.priority_order()) {
    if (opts.stats) opts.stats->on_main_pop(t);
    ctx.run_node(0, t);
    if (opts.stats) opts.stats->on_flag_set(t);
  }
}

void run_barrier(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                 const RunOptions& opts) {
  check_shapes(graph, mat, store, opts);
  prepare(graph, mat, opts);
  RunContext ctx{graph, mat, store, opts};
  RunStats* stats = opts.stats;
  const std::size_t threads = opts.threads;

  auto on_phase = [stats]() noexcept {
    if (stats) stats->on_rendezvous();
  };
  std::barrier sync(static_cast<std::ptrdiff_t>(threads), on_phase);
  std::atomic<bool> aborted{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto guarded = [&](std::size_t id, TaskIndex t) {
    if (aborted.load(std::memory_order_relaxed)) return;
    try {
      if (stats) stats->on_main_pop(t);
      ctx.run_node(id, t);
      if (stats) stats->on_flag_set(t);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      aborted.store(true);
    }
  };

  auto worker = [&](std::size_t id) {
    for (std::size_t level = 0; level < graph.levels(); ++level) {
      if (id == 0) guarded(id, graph.diagonal(level));
      sync.arrive_and_wait();
      const Range trailing = graph.trailing_range(level);
      const std::size_t count = trailing.size();
      const std::size_t lo = trailing.begin + count * id / threads;
      const std::size_t hi = trailing.begin + count * (id + 1) / threads;
      for (TaskIndex t = lo; t < hi; ++t) guarded(id, t);
      sync.arrive_and_wait();
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  if (failure) std::rethrow_exception(failure);
}

void run_lockfree(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                  const RunOptions& opts) {
  run_dual_queue<FifoQueue>(graph, mat, store, opts);
}

void run_priority(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                  const RunOptions& opts) {
  run_dual_queue<PriorityQueue>(graph, mat, store, opts);
}

void execute(SchedulerKind kind, const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
             const RunOptions& opts) {
  switch (kind) {
    case SchedulerKind::Sequential:
      return run_sequential(graph, mat, store, opts);
    case SchedulerKind::Barrier:
      return run_barrier(graph, mat, store, opts);
    case SchedulerKind::LockFree:
      return run_lockfree(graph, mat, store, opts);
    case SchedulerKind::Priority:
      return run_priority(graph, mat, store, opts);
  }
}

ReflectorStore factorize(DenseMatrix& mat, SchedulerKind kind, std::size_t alpha,
                         std::size_t beta, const RunOptions& opts) {
  const TaskGraph graph = build_task_graph(mat.rows(), mat.cols(), alpha, beta);
  ReflectorStore store(std::min(mat.rows(), mat.cols()));
  execute(kind, graph, mat, store, opts);
  return store;
}

}  // namespace taskqr
