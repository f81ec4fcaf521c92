#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "taskqr/bench.hpp"
#include "taskqr/kernels.hpp"
#include "taskqr/oracle.hpp"
#include "taskqr/schedulers.hpp"
#include "taskqr/solver.hpp"
#include "taskqr/task_graph.hpp"

namespace py = pybind11;
using namespace taskqr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto* p = a.data();
  return DenseMatrix(a.shape(0), a.shape(1), std::vector<double>(p, p + a.size()));
}

Array to_array(const DenseMatrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

SchedulerKind scheduler_from(const std::string& name) {
  const auto kind = parse_scheduler(name);
  if (!kind) throw std::invalid_argument("unknown scheduler '" + name + "'");
  return *kind;
}

// Factored matrix plus reflector data, as returned to Python.
struct PyFactorization {
  Factorization f;
  std::size_t original_cols;
};

py::dict graph_info(std::size_t m, std::size_t n, std::size_t alpha, std::size_t beta) {
  const TaskGraph g = build_task_graph(m, n, alpha, beta);
  py::list nodes;
  for (TaskIndex t = 0; t < g.size(); ++t) {
    const TaskNode& node = g.node(t);
    py::dict d;
    d["label"] = node.label();
    d["kind"] = node.kind == TaskKind::Diagonal ? "diagonal" : "trailing";
    d["pivots"] = py::make_tuple(node.pivots.begin, node.pivots.end);
    d["rows"] = py::make_tuple(node.rows.begin, node.rows.end);
    d["parents"] = node.parents;
    d["children"] = node.children;
    d["releases"] = node.releases;
    d["critical"] = node.critical;
    d["top_level"] = node.top_level;
    d["bottom_level"] = node.bottom_level;
    d["priority"] = node.priority;
    nodes.append(d);
  }
  py::dict info;
  info["nodes"] = nodes;
  info["edges"] = g.edge_count();
  info["priority_order"] = g.priority_order();
  const auto report = validate_graph(g);
  info["valid"] = report.ok;
  info["validation_message"] = report.message;
  return info;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Task-graph scheduled in-place Householder factorization";

  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);
  py::register_exception<SchedulerStalled>(m, "SchedulerStalled", PyExc_RuntimeError);

  py::class_<PyFactorization>(m, "Factorization")
      .def_property_readonly("matrix", [](const PyFactorization& p) { return to_array(p.f.mat); })
      .def_property_readonly("up", [](const PyFactorization& p) {
        auto v = p.f.store.up_values();
        return std::vector<double>(v.begin(), v.end());
      })
      .def_property_readonly("b", [](const PyFactorization& p) {
        auto v = p.f.store.b_values();
        return std::vector<double>(v.begin(), v.end());
      })
      .def_property_readonly("defined", [](const PyFactorization& p) {
        std::vector<bool> out;
        for (auto f : p.f.store.defined_flags()) out.push_back(f != 0);
        return out;
      })
      .def("solve", [](const PyFactorization& p, const std::vector<double>& rhs) {
        return solve(p.f, rhs);
      }, py::arg("rhs"))
      .def("reconstruct", [](const PyFactorization& p) {
        return to_array(reconstruct_original(p.f.mat, p.f.store, p.original_cols));
      })
      .def("q", [](const PyFactorization& p) { return to_array(explicit_q(p.f.mat, p.f.store)); })
      .def("condition_estimate", [](const PyFactorization& p) { return condition_estimate(p.f); });

  m.def("factorize", [](const Array& a, const std::string& scheduler, std::size_t alpha,
                        std::size_t beta, std::size_t threads) {
    DenseMatrix mat = to_matrix(a);
    const std::size_t cols = mat.cols();
    RunOptions opts;
    opts.threads = threads;
    ReflectorStore store(0);
    {
      py::gil_scoped_release release;
      store = factorize(mat, scheduler_from(scheduler), alpha, beta, opts);
    }
    return PyFactorization{Factorization{std::move(mat), std::move(store)}, cols};
  }, py::arg("a"), py::arg("scheduler") = "lockfree", py::arg("alpha") = 12, py::arg("beta") = 12,
        py::arg("threads") = 1);

  m.def("sequential_factorize", [](const Array& a) {
    DenseMatrix mat = to_matrix(a);
    const std::size_t cols = mat.cols();
    ReflectorStore store = sequential_factorize(mat);
    return PyFactorization{Factorization{std::move(mat), std::move(store)}, cols};
  }, py::arg("a"));

  m.def("solve", [](const Array& a, const std::vector<double>& rhs, const std::string& scheduler,
                    std::size_t alpha, std::size_t beta, std::size_t threads) {
    Factorization f{to_matrix(a), ReflectorStore(0)};
    RunOptions opts;
    opts.threads = threads;
    f.store = factorize(f.mat, scheduler_from(scheduler), alpha, beta, opts);
    return solve(f, rhs);
  }, py::arg("a"), py::arg("rhs"), py::arg("scheduler") = "lockfree", py::arg("alpha") = 12,
        py::arg("beta") = 12, py::arg("threads") = 1);

  m.def("gen_matrix", [](std::size_t rows, std::size_t cols, std::uint64_t seed, bool dominant) {
    return to_array(bench::gen_matrix(rows, cols, seed, dominant));
  }, py::arg("rows"), py::arg("cols"), py::arg("seed") = 1, py::arg("dominant") = false);

  m.def("task_graph", &graph_info, py::arg("m"), py::arg("n"), py::arg("alpha"), py::arg("beta"));

  m.def("schedulers", [] {
    return std::vector<std::string>{"seq", "barrier", "lockfree", "priority"};
  });
}
