#include "rydcft/sparse_operator.hpp"

#include <algorithm>
#include <cmath>

#include "rydcft/errors.hpp"

namespace rydcft {

SparseOperator::SparseOperator(std::size_t dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

SparseOperator SparseOperator::diagonal(const Eigen::VectorXd& d) {
  RowBuilder b(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] != 0.0) b.add(static_cast<Index>(i), d[i]);
    b.end_row();
  }
  return b.finish();
}

SparseOperator SparseOperator::from_triplets(
    std::size_t dim, std::vector<std::pair<std::pair<Index, Index>, double>> t) {
  std::sort(t.begin(), t.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  RowBuilder b(dim);
  std::size_t k = 0;
  for (std::size_t r = 0; r < dim; ++r) {
    while (k < t.size() && t[k].first.first == r) {
      if (t[k].first.second >= dim) throw SizeError("triplet column out of range");
      b.add(t[k].first.second, t[k].second);
      ++k;
    }
    b.end_row();
  }
  if (k != t.size()) throw SizeError("triplet row out of range");
  return b.finish();
}

SparseOperator::RowBuilder::RowBuilder(std::size_t dim) : dim_(dim) {
  row_ptr_.reserve(dim + 1);
  row_ptr_.push_back(0);
}

void SparseOperator::RowBuilder::end_row() {
  std::sort(row_.begin(), row_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < row_.size();) {
    const Index c = row_[k].first;
    double v = 0.0;
    for (; k < row_.size() && row_[k].first == c; ++k) v += row_[k].second;
    if (v != 0.0) {
      cols_.push_back(c);
      vals_.push_back(v);
    }
  }
  row_.clear();
  row_ptr_.push_back(cols_.size());
}

SparseOperator SparseOperator::RowBuilder::finish() {
  if (row_ptr_.size() != dim_ + 1) throw SizeError("row builder: row count mismatch");
  SparseOperator op;
  op.dim_ = dim_;
  op.row_ptr_ = std::move(row_ptr_);
  op.cols_ = std::move(cols_);
  op.vals_ = std::move(vals_);
  op.refresh_flags();
  return op;
}

void SparseOperator::refresh_flags() {
  diagonal_only_ = true;
  for (std::size_t r = 0; r < dim_ && diagonal_only_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (cols_[k] != r) {
        diagonal_only_ = false;
        break;
      }
    }
  }
}

double SparseOperator::entry(std::size_t r, std::size_t c) const {
  const auto b = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto e = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(b, e, static_cast<Index>(c));
  if (it == e || *it != c) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

Eigen::VectorXd SparseOperator::diagonal_values() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dim_; ++r) d[r] = entry(r, r);
  return d;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, cols_[k]) = vals_[k];
  return m;
}

bool SparseOperator::is_symmetric() const {
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (entry(cols_[k], r) != vals_[k]) return false;
  return true;
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

double SparseOperator::expectation(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd y;
  apply(v, y);
  return v.dot(y).real();
}

SparseOperator SparseOperator::combine(
    const std::vector<std::pair<double, const SparseOperator*>>& terms) {
  if (terms.empty()) throw SizeError("combine: no terms");
  const std::size_t dim = terms.front().second->dim();
  for (const auto& [c, op] : terms)
    if (op->dim() != dim) throw SizeError("combine: dimension mismatch");
  RowBuilder b(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (const auto& [c, op] : terms) {
      if (c == 0.0) continue;
      for (std::size_t k = op->row_ptr_[r]; k < op->row_ptr_[r + 1]; ++k)
        b.add(op->cols_[k], c * op->vals_[k]);
    }
    b.end_row();
  }
  return b.finish();
}

Eigen::VectorXd permute(const std::vector<std::size_t>& perm, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  for (std::size_t k = 0; k < perm.size(); ++k) y[static_cast<Eigen::Index>(perm[k])] = x[k];
  return y;
}

}  // namespace rydcft
