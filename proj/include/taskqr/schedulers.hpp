#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taskqr/matrix.hpp"
#include "taskqr/task_graph.hpp"

namespace taskqr {

enum class SchedulerKind { Sequential, Barrier, LockFree, Priority };

std::string_view to_string(SchedulerKind kind) noexcept;
/// Accepts "seq", "sequential", "barrier", "lockfree", "priority".
std::optional<SchedulerKind> parse_scheduler(std::string_view name) noexcept;

/// Per-run instrumentation. Counters are indexed by task id and sized by the
/// executor on first use; pass the same object to one run at a time.
class RunStats {
 public:
  void reset(const TaskGraph& graph, std::size_t rows);

  std::vector<int> main_pushes() const { return snapshot(main_pushes_); }
  std::vector<int> flag_sets() const { return snapshot(flag_sets_); }
  std::vector<int> executions() const { return snapshot(executions_); }
  /// How many times update_pivot_row ran for each pivot.
  std::vector<int> pivot_writes() const { return snapshot(pivot_writes_); }
  /// Barrier phase completions (barrier executor only).
  long rendezvous() const noexcept { return rendezvous_.load(); }
  /// Tasks that started while another in-flight task held one of their rows.
  long lease_violations() const noexcept { return lease_violations_.load(); }

  /// Main-queue push/pop events in the order they happened; recorded only when
  /// `record_queue_events` is set. Serialized with a mutex, so intended for tests.
  struct QueueEvent {
    bool push;
    TaskIndex task;
  };
  bool record_queue_events = false;
  std::vector<QueueEvent> queue_events() const;

  // Executor hooks.
  void on_main_push(TaskIndex t);
  void on_main_pop(TaskIndex t);
  void on_flag_set(TaskIndex t) { flag_sets_[t].fetch_add(1, std::memory_order_relaxed); }
  void on_pivot(std::size_t i) { pivot_writes_[i].fetch_add(1, std::memory_order_relaxed); }
  void on_rendezvous() { rendezvous_.fetch_add(1, std::memory_order_relaxed); }
  void acquire_rows(TaskIndex t, Range rows);
  void release_rows(Range rows);

 private:
  static std::vector<int> snapshot(const std::vector<std::atomic<int>>& v);

  std::vector<std::atomic<int>> main_pushes_;
  std::vector<std::atomic<int>> flag_sets_;
  std::vector<std::atomic<int>> executions_;
  std::vector<std::atomic<int>> pivot_writes_;
  std::vector<std::atomic<std::int64_t>> row_owner_;
  std::atomic<long> rendezvous_{0};
  std::atomic<long> lease_violations_{0};
  mutable std::mutex events_mutex_;
  std::vector<QueueEvent> events_;
};

struct TraceEvent {
  std::size_t worker;
  TaskIndex task;
  std::int64_t start_ns;
  std::int64_t end_ns;
};

/// Per-worker execution trace, merged after the run.
class TraceLog {
 public:
  void reset(std::size_t workers);
  void record(std::size_t worker, TraceEvent e) { per_worker_[worker].push_back(e); }
  /// All events ordered by start time.
  std::vector<TraceEvent> events() const;
  /// CSV: worker,task,label,start_ns,end_ns. Times are relative to the earliest start.
  void write_csv(const TaskGraph& graph, std::ostream& out) const;

 private:
  std::vector<std::vector<TraceEvent>> per_worker_;
};

struct RunOptions {
  std::size_t threads = 1;
  /// Dual-queue executors abort if no task completes for this long.
  std::chrono::milliseconds watchdog{30000};
  RunStats* stats = nullptr;
  TraceLog* trace = nullptr;
};

/// Raised when a dual-queue run stops making progress. what() carries a dump of
/// the queue and dependency-table state.
class SchedulerStalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diagonal task body: computes each pivot of the block and updates the rows of
/// the block's own row range below it.
void run_task1(DenseMatrix& mat, ReflectorStore& store, const TaskNode& node,
               RunStats* stats = nullptr);

/// Trailing task body: applies the already-published reflectors of the block's
/// pivots to the task's rows. Undefined pivots are skipped.
void run_task2(DenseMatrix& mat, ReflectorStore& store, const TaskNode& node);

/// Executes tasks one at a time in TaskGraph::priority_order().
void run_sequential(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                    const RunOptions& opts = {});

/// Level-synchronous execution: per pivot block, one worker runs the diagonal
/// task, everyone meets, the trailing tasks are split into contiguous ranges,
/// everyone meets again.
void run_barrier(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                 const RunOptions& opts);

/// Dual-queue execution with FIFO main and wait queues.
void run_lockfree(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                  const RunOptions& opts);

/// Dual-queue execution where the main queue yields the highest-priority task.
void run_priority(const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
                  const RunOptions& opts);

/// Dispatches to one of the executors. The graph must match the matrix shape.
void execute(SchedulerKind kind, const TaskGraph& graph, DenseMatrix& mat, ReflectorStore& store,
             const RunOptions& opts);

/// Builds the graph, allocates the store and runs `kind` in place.
ReflectorStore factorize(DenseMatrix& mat, SchedulerKind kind, std::size_t alpha,
                         std::size_t beta, const RunOptions& opts);

}  // namespace taskqr
