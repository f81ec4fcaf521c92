#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace taskqr {

/// Half-open index range [begin, end).
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return begin <= i && i < end; }
  bool intersects(const Range& o) const noexcept { return begin < o.end && o.begin < end; }
  bool operator==(const Range&) const = default;
};

/// Coalescing geometry: pivots are grouped `alpha` at a time, rows `beta` at a time.
struct ChunkGrid {
  std::size_t alpha = 1;
  std::size_t beta = 1;
  std::size_t pivots = 0;  ///< min(m, n)
  std::size_t rows = 0;    ///< m
  std::vector<Range> pivot_blocks;
  std::vector<Range> row_blocks;

  ChunkGrid(std::size_t m, std::size_t n, std::size_t alpha, std::size_t beta);

  /// Smallest row-block boundary at or past the end of pivot block I.
  std::size_t diag_end(std::size_t block) const noexcept;

  /// First row block lying entirely at or past diag_end(I).
  std::size_t first_trailing_block(std::size_t block) const noexcept;

  /// Row block holding row r.
  std::size_t row_block_of(std::size_t r) const noexcept { return r / beta; }
};

enum class TaskKind : std::uint8_t { Diagonal, Trailing };

using TaskIndex = std::size_t;

struct TaskNode {
  TaskKind kind = TaskKind::Diagonal;
  std::size_t block = 0;      ///< pivot-block index I
  std::size_t row_block = 0;  ///< row-block index J; meaningless for Diagonal
  Range pivots;
  Range rows;
  std::vector<TaskIndex> parents;
  std::vector<TaskIndex> children;
  std::vector<TaskIndex> releases;  ///< children this node pushes once it completes
  bool critical = false;
  int top_level = 0;
  int bottom_level = 0;
  int priority = 0;

  /// "D2" or "T(1,3)"; zero-based block indices.
  std::string label() const;
};

/// Chunked DAG over Diagonal(I) and Trailing(I, J) tasks.
///
/// Nodes are stored level by level: Diagonal(I) followed by its Trailing(I, J)
/// siblings in increasing J. The root is always index 0.
class TaskGraph {
 public:
  TaskGraph(ChunkGrid grid, std::vector<TaskNode> nodes, std::vector<TaskIndex> level_offsets);

  const ChunkGrid& grid() const noexcept { return grid_; }
  const std::vector<TaskNode>& nodes() const noexcept { return nodes_; }
  std::vector<TaskNode>& mutable_nodes() noexcept { return nodes_; }
  const TaskNode& node(TaskIndex t) const { return nodes_.at(t); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t levels() const noexcept { return grid_.pivot_blocks.size(); }
  TaskIndex root() const noexcept { return 0; }

  TaskIndex diagonal(std::size_t block) const { return level_offsets_.at(block); }
  std::optional<TaskIndex> trailing(std::size_t block, std::size_t row_block) const;
  /// Trailing(I, .) tasks of one level, as a contiguous index range.
  Range trailing_range(std::size_t block) const;

  /// Level-(I) task whose row range contains row r, if any.
  std::optional<TaskIndex> writer_of_row(std::size_t block, std::size_t r) const;

  /// Tasks sorted by priority descending, then Diagonal before Trailing, then
  /// smaller I, then smaller J. This is a topological order.
  std::vector<TaskIndex> priority_order() const;

  std::size_t edge_count() const noexcept;

 private:
  ChunkGrid grid_;
  std::vector<TaskNode> nodes_;
  std::vector<TaskIndex> level_offsets_;
};

/// Deterministic tie-break used after priority: true when a should run before b.
bool tie_break_before(const TaskNode& a, const TaskNode& b) noexcept;

/// Builds the DAG, assigns levels, priorities, critical marks and releasers.
/// Throws std::invalid_argument if any argument is zero.
TaskGraph build_task_graph(std::size_t m, std::size_t n, std::size_t alpha, std::size_t beta);

struct Levels {
  std::vector<int> top;
  std::vector<int> bottom;
};

/// Longest-path levels with unit edge weights. Throws std::logic_error on a cycle.
Levels compute_levels(const TaskGraph& graph);

/// Every Diagonal node and every Trailing parent of a Diagonal node is critical.
/// Trailing(I, J) is released by Diagonal(I). Diagonal(I) is released by its first
/// Trailing parent in row order, or by Diagonal(I-1) when it has none.
void mark_critical_and_releasers(TaskGraph& graph);

struct ValidationReport {
  bool ok = true;
  std::string message;
};

/// Structural checks: acyclic, mirrored edges, each pivot in exactly one
/// Diagonal, each (pivot, row) update in exactly one task, every row writer and
/// pivot producer an ancestor of the task that depends on it, one releaser per
/// non-root node. Reports the first violation.
ValidationReport validate_graph(const TaskGraph& graph);

/// Graphviz dump; labels carry id, priority and a '*' for critical nodes.
void write_dot(const TaskGraph& graph, std::ostream& out);

}  // namespace taskqr
