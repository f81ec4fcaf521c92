#include "taskqr/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace taskqr {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const DenseMatrix& a) {
  return {a.data().data(), static_cast<Eigen::Index>(a.rows()),
          static_cast<Eigen::Index>(a.cols())};
}

DenseMatrix to_dense(const RowMajor& a) {
  DenseMatrix out(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()));
  Eigen::Map<RowMajor>(out.data().data(), a.rows(), a.cols()) = a;
  return out;
}

Eigen::VectorXd reflector_vector(const DenseMatrix& factored, const ReflectorStore& store,
                                 std::size_t i) {
  const auto n = static_cast<Eigen::Index>(factored.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(static_cast<Eigen::Index>(i)) = store.up(i);
  for (std::size_t k = i + 1; k < factored.cols(); ++k) {
    v(static_cast<Eigen::Index>(k)) = factored(i, k);
  }
  return v;
}

RowMajor reflector_matrix(const DenseMatrix& factored, const ReflectorStore& store,
                          std::size_t i) {
  const auto n = static_cast<Eigen::Index>(factored.cols());
  RowMajor h = RowMajor::Identity(n, n);
  if (!store.defined(i)) return h;
  const Eigen::VectorXd v = reflector_vector(factored, store, i);
  h -= (2.0 / v.squaredNorm()) * (v * v.transpose());
  return h;
}

RowMajor accumulate_q(const DenseMatrix& factored, const ReflectorStore& store) {
  const auto n = static_cast<Eigen::Index>(factored.cols());
  RowMajor q = RowMajor::Identity(n, n);
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store.defined(i)) continue;
    // H_i is the identity outside the trailing block starting at i.
    const auto off = static_cast<Eigen::Index>(i);
    const RowMajor h = reflector_matrix(factored, store, i);
    const RowMajor block = h.bottomRightCorner(n - off, n - off) * q.bottomRows(n - off);
    q.bottomRows(n - off) = block;
  }
  return q;
}

}  // namespace

DenseMatrix explicit_reflector(const DenseMatrix& factored, const ReflectorStore& store,
                               std::size_t i) {
  if (i >= store.size()) throw std::out_of_range("explicit_reflector: pivot out of range");
  return to_dense(reflector_matrix(factored, store, i));
}

DenseMatrix explicit_q(const DenseMatrix& factored, const ReflectorStore& store) {
  return to_dense(accumulate_q(factored, store));
}

DenseMatrix lower_factor(const DenseMatrix& factored) {
  DenseMatrix l(factored.rows(), factored.cols());
  for (std::size_t i = 0; i < factored.rows(); ++i) {
    for (std::size_t j = 0; j <= std::min(i, factored.cols() - 1); ++j) l(i, j) = factored(i, j);
  }
  return l;
}

DenseMatrix reconstruct_original(const DenseMatrix& factored, const ReflectorStore& store,
                                 std::size_t original_n) {
  if (original_n != factored.cols()) {
    throw std::invalid_argument("reconstruct_original: column count mismatch");
  }
  if (store.size() != std::min(factored.rows(), factored.cols())) {
    throw std::invalid_argument("reconstruct_original: store size must be min(m, n)");
  }
  const DenseMatrix l = lower_factor(factored);
  const RowMajor product = view(l) * accumulate_q(factored, store);
  return to_dense(product);
}

double orthogonality_error(const DenseMatrix& q) {
  const auto qq = view(q);
  const RowMajor gram = qq * qq.transpose();
  return (gram - RowMajor::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("relative_frobenius_error: shape mismatch");
  }
  const double diff = (view(a) - view(b)).norm();
  const double ref = view(b).norm();
  return ref == 0.0 ? diff : diff / ref;
}

}  // namespace taskqr
