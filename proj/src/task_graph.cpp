#include "taskqr/task_graph.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace taskqr {

ChunkGrid::ChunkGrid(std::size_t m, std::size_t n, std::size_t alpha_, std::size_t beta_)
    : alpha(alpha_), beta(beta_), pivots(std::min(m, n)), rows(m) {
  if (m == 0 || n == 0 || alpha == 0 || beta == 0) {
    throw std::invalid_argument("task graph: m, n, alpha and beta must all be >= 1");
  }
  for (std::size_t s = 0; s < pivots; s += alpha) {
    pivot_blocks.push_back({s, std::min(s + alpha, pivots)});
  }
  for (std::size_t s = 0; s < rows; s += beta) {
    row_blocks.push_back({s, std::min(s + beta, rows)});
  }
}

std::size_t ChunkGrid::diag_end(std::size_t block) const noexcept {
  const std::size_t end = pivot_blocks[block].end;
  return std::min((end + beta - 1) / beta * beta, rows);
}

std::size_t ChunkGrid::first_trailing_block(std::size_t block) const noexcept {
  return (diag_end(block) + beta - 1) / beta;
}

std::string TaskNode::label() const {
  if (kind == TaskKind::Diagonal) return "D" + std::to_string(block);
  return "T(" + std::to_string(block) + "," + std::to_string(row_block) + ")";
}

TaskGraph::TaskGraph(ChunkGrid grid, std::vector<TaskNode> nodes,
                     std::vector<TaskIndex> level_offsets)
    : grid_(std::move(grid)), nodes_(std::move(nodes)), level_offsets_(std::move(level_offsets)) {}

std::optional<TaskIndex> TaskGraph::trailing(std::size_t block, std::size_t row_block) const {
  const std::size_t first = grid_.first_trailing_block(block);
  if (block >= levels() || row_block < first || row_block >= grid_.row_blocks.size()) {
    return std::nullopt;
  }
  return level_offsets_[block] + 1 + (row_block - first);
}

Range TaskGraph::trailing_range(std::size_t block) const {
  const std::size_t begin = level_offsets_.at(block) + 1;
  const std::size_t end = block + 1 < levels() ? level_offsets_[block + 1] : nodes_.size();
  return {begin, end};
}

std::optional<TaskIndex> TaskGraph::writer_of_row(std::size_t block, std::size_t r) const {
  const TaskIndex d = diagonal(block);
  if (nodes_[d].rows.contains(r)) return d;
  if (r >= grid_.diag_end(block)) return trailing(block, grid_.row_block_of(r));
  return std::nullopt;
}

bool tie_break_before(const TaskNode& a, const TaskNode& b) noexcept {
  return std::tuple(a.kind != TaskKind::Diagonal, a.block, a.row_block) <
         std::tuple(b.kind != TaskKind::Diagonal, b.block, b.row_block);
}

std::vector<TaskIndex> TaskGraph::priority_order() const {
  std::vector<TaskIndex> order(nodes_.size());
  for (TaskIndex t = 0; t < order.size(); ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](TaskIndex a, TaskIndex b) {
    const TaskNode& x = nodes_[a];
    const TaskNode& y = nodes_[b];
    if (x.priority != y.priority) return x.priority > y.priority;
    return tie_break_before(x, y);
  });
  return order;
}

std::size_t TaskGraph::edge_count() const noexcept {
  std::size_t edges = 0;
  for (const auto& n : nodes_) edges += n.parents.size();
  return edges;
}

TaskGraph build_task_graph(std::size_t m, std::size_t n, std::size_t alpha, std::size_t beta) {
  ChunkGrid grid(m, n, alpha, beta);
  const std::size_t levels = grid.pivot_blocks.size();
  const std::size_t row_blocks = grid.row_blocks.size();

  std::vector<TaskNode> nodes;
  std::vector<TaskIndex> offsets(levels);
  for (std::size_t I = 0; I < levels; ++I) {
    offsets[I] = nodes.size();
    const Range piv = grid.pivot_blocks[I];
    TaskNode diag;
    diag.kind = TaskKind::Diagonal;
    diag.block = I;
    diag.pivots = piv;
    diag.rows = {piv.begin, grid.diag_end(I)};
    nodes.push_back(std::move(diag));
    for (std::size_t J = grid.first_trailing_block(I); J < row_blocks; ++J) {
      TaskNode t;
      t.kind = TaskKind::Trailing;
      t.block = I;
      t.row_block = J;
      t.pivots = piv;
      t.rows = grid.row_blocks[J];
      nodes.push_back(std::move(t));
    }
  }

  TaskGraph graph(std::move(grid), std::move(nodes), std::move(offsets));
  auto& ns = graph.mutable_nodes();
  auto link = [&](TaskIndex parent, TaskIndex child) {
    ns[child].parents.push_back(parent);
    ns[parent].children.push_back(child);
  };

  for (std::size_t I = 0; I < levels; ++I) {
    const TaskIndex d = graph.diagonal(I);
    if (I > 0) {
      // Every level-(I-1) task whose rows overlap this diagonal's rows.
      const TaskIndex prev = graph.diagonal(I - 1);
      if (ns[prev].rows.intersects(ns[d].rows)) link(prev, d);
      const std::size_t first = graph.grid().first_trailing_block(I - 1);
      const std::size_t last = graph.grid().first_trailing_block(I);
      for (std::size_t J = first; J < last; ++J) link(*graph.trailing(I - 1, J), d);
    }
    const Range trailing = graph.trailing_range(I);
    for (TaskIndex t = trailing.begin; t < trailing.end; ++t) {
      link(d, t);
      if (I > 0) link(*graph.trailing(I - 1, ns[t].row_block), t);
    }
  }

  const Levels lv = compute_levels(graph);
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    ns[t].top_level = lv.top[t];
    ns[t].bottom_level = lv.bottom[t];
    ns[t].priority = lv.bottom[t];
  }
  mark_critical_and_releasers(graph);
  return graph;
}

namespace {

// Kahn's algorithm; returns fewer than size() entries when a cycle exists.
std::vector<TaskIndex> topological_order(const TaskGraph& graph) {
  const auto& ns = graph.nodes();
  std::vector<std::size_t> indegree(ns.size());
  std::queue<TaskIndex> ready;
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    indegree[t] = ns[t].parents.size();
    if (indegree[t] == 0) ready.push(t);
  }
  std::vector<TaskIndex> order;
  order.reserve(ns.size());
  while (!ready.empty()) {
    const TaskIndex t = ready.front();
    ready.pop();
    order.push_back(t);
    for (TaskIndex c : ns[t].children) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

bool is_ancestor(const TaskGraph& graph, TaskIndex ancestor, TaskIndex t) {
  const auto& ns = graph.nodes();
  for (TaskIndex p : ns[t].parents) {
    if (p == ancestor) return true;
  }
  std::vector<char> seen(ns.size(), 0);
  std::vector<TaskIndex> stack(ns[t].parents.begin(), ns[t].parents.end());
  while (!stack.empty()) {
    const TaskIndex v = stack.back();
    stack.pop_back();
    if (v == ancestor) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    stack.insert(stack.end(), ns[v].parents.begin(), ns[v].parents.end());
  }
  return false;
}

ValidationReport fail(std::string message) { return {false, std::move(message)}; }

}  // namespace

Levels compute_levels(const TaskGraph& graph) {
  const auto& ns = graph.nodes();
  const auto order = topological_order(graph);
  if (order.size() != ns.size()) {
    throw std::logic_error("compute_levels: task graph contains a cycle");
  }
  Levels lv{std::vector<int>(ns.size(), 0), std::vector<int>(ns.size(), 0)};
  for (TaskIndex t : order) {
    for (TaskIndex c : ns[t].children) lv.top[c] = std::max(lv.top[c], lv.top[t] + 1);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (TaskIndex c : ns[*it].children) {
      lv.bottom[*it] = std::max(lv.bottom[*it], lv.bottom[c] + 1);
    }
  }
  return lv;
}

void mark_critical_and_releasers(TaskGraph& graph) {
  auto& ns = graph.mutable_nodes();
  for (auto& n : ns) {
    n.critical = n.kind == TaskKind::Diagonal;
    n.releases.clear();
  }
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    const TaskNode& node = ns[t];
    std::optional<TaskIndex> releaser;
    if (node.kind == TaskKind::Trailing) {
      for (TaskIndex p : node.parents) {
        if (ns[p].kind == TaskKind::Diagonal && ns[p].block == node.block) releaser = p;
      }
    } else {
      std::optional<TaskIndex> first_trailing;
      std::optional<TaskIndex> diagonal;
      for (TaskIndex p : node.parents) {
        if (ns[p].kind == TaskKind::Trailing) {
          ns[p].critical = true;
          if (!first_trailing || ns[p].rows.begin < ns[*first_trailing].rows.begin) {
            first_trailing = p;
          }
        } else {
          diagonal = p;
        }
      }
      releaser = first_trailing ? first_trailing : diagonal;
    }
    if (releaser) ns[*releaser].releases.push_back(t);
  }
}

ValidationReport validate_graph(const TaskGraph& graph) {
  const auto& ns = graph.nodes();
  const ChunkGrid& grid = graph.grid();

  for (TaskIndex t = 0; t < ns.size(); ++t) {
    for (TaskIndex p : ns[t].parents) {
      if (p >= ns.size()) return fail("parent index out of range at " + ns[t].label());
      const auto& ch = ns[p].children;
      if (std::find(ch.begin(), ch.end(), t) == ch.end()) {
        return fail("edge mismatch: " + ns[p].label() + " lists no child " + ns[t].label());
      }
    }
    for (TaskIndex c : ns[t].children) {
      if (c >= ns.size()) return fail("child index out of range at " + ns[t].label());
      const auto& pa = ns[c].parents;
      if (std::find(pa.begin(), pa.end(), t) == pa.end()) {
        return fail("edge mismatch: " + ns[c].label() + " lists no parent " + ns[t].label());
      }
    }
  }

  if (topological_order(graph).size() != ns.size()) return fail("cycle detected");

  for (TaskIndex t = 0; t < ns.size(); ++t) {
    if (t != graph.root() && ns[t].parents.empty()) {
      return fail("second root: " + ns[t].label());
    }
  }
  if (!ns.empty() && !ns[graph.root()].parents.empty()) return fail("root has parents");

  // Pivots and (pivot, row) update pairs, each owned by exactly one task.
  std::vector<int> pivot_owner_count(grid.pivots, 0);
  std::vector<std::vector<Range>> updates(grid.pivots);
  for (const auto& n : ns) {
    for (std::size_t i = n.pivots.begin; i < n.pivots.end && i < grid.pivots; ++i) {
      if (n.kind == TaskKind::Diagonal) {
        ++pivot_owner_count[i];
        if (i + 1 < n.rows.end) updates[i].push_back({i + 1, n.rows.end});
      } else {
        if (n.rows.begin <= i) {
          return fail("trailing task " + n.label() + " updates a row at or above its pivot");
        }
        updates[i].push_back(n.rows);
      }
    }
  }
  for (std::size_t i = 0; i < grid.pivots; ++i) {
    if (pivot_owner_count[i] != 1) {
      return fail("pivot " + std::to_string(i) + " computed by " +
                  std::to_string(pivot_owner_count[i]) + " diagonal tasks");
    }
    auto& segs = updates[i];
    std::sort(segs.begin(), segs.end(),
              [](const Range& a, const Range& b) { return a.begin < b.begin; });
    std::size_t next = i + 1;
    for (const Range& s : segs) {
      if (s.begin != next) {
        return fail("pivot " + std::to_string(i) + (s.begin < next ? ": overlapping" : ": missing") +
                    " update of row " + std::to_string(std::min(s.begin, next)));
      }
      next = s.end;
    }
    if (next != grid.rows) {
      return fail("pivot " + std::to_string(i) + ": missing update of row " + std::to_string(next));
    }
  }

  // Each task must follow the producer of its pivots and the previous-level
  // writer of every row it touches.
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    const TaskNode& n = ns[t];
    if (n.kind == TaskKind::Trailing) {
      const TaskIndex d = graph.diagonal(n.block);
      if (!is_ancestor(graph, d, t)) {
        return fail("uncovered dependency: " + ns[d].label() + " must precede " + n.label());
      }
    }
    if (n.block == 0) continue;
    for (std::size_t r = n.rows.begin; r < n.rows.end;) {
      const auto w = graph.writer_of_row(n.block - 1, r);
      if (!w) {
        ++r;
        continue;
      }
      if (!is_ancestor(graph, *w, t)) {
        return fail("uncovered dependency: " + ns[*w].label() + " must precede " + n.label());
      }
      r = ns[*w].rows.end;
    }
  }

  std::vector<int> released_by(ns.size(), 0);
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    for (TaskIndex c : ns[t].releases) {
      const auto& pa = ns[c].parents;
      if (std::find(pa.begin(), pa.end(), t) == pa.end()) {
        return fail("releaser " + ns[t].label() + " is not a parent of " + ns[c].label());
      }
      ++released_by[c];
    }
  }
  for (TaskIndex t = 0; t < ns.size(); ++t) {
    const int expected = t == graph.root() ? 0 : 1;
    if (released_by[t] != expected) {
      return fail(ns[t].label() + " has " + std::to_string(released_by[t]) + " releasers");
    }
  }
  return {};
}

void write_dot(const TaskGraph& graph, std::ostream& out) {
  out << "digraph taskgraph {\n";
  for (TaskIndex t = 0; t < graph.size(); ++t) {
    const TaskNode& n = graph.node(t);
    out << "  n" << t << " [label=\"" << n.label() << "\\np=" << n.priority
        << (n.critical ? "*" : "") << "\"" << (n.critical ? ", style=filled" : "") << "];\n";
  }
  for (TaskIndex t = 0; t < graph.size(); ++t) {
    for (TaskIndex c : graph.node(t).children) out << "  n" << t << " -> n" << c << ";\n";
  }
  out << "}\n";
}

}  // namespace taskqr
