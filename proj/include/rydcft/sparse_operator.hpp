#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace rydcft {

using Index = std::uint32_t;
using cplx = std::complex<double>;

// Real symmetric operator in CSR form. Rows are sorted, duplicates merged.
class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(std::size_t dim);  // zero operator

  static SparseOperator diagonal(const Eigen::VectorXd& d);
  static SparseOperator from_triplets(std::size_t dim,
                                      std::vector<std::pair<std::pair<Index, Index>, double>> t);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return vals_.size(); }
  bool is_diagonal() const { return diagonal_only_; }

  double entry(std::size_t r, std::size_t c) const;
  Eigen::VectorXd diagonal_values() const;
  Eigen::MatrixXd to_dense() const;
  bool is_symmetric() const;
  double max_abs() const;

  template <class Vec>
  void apply(const Vec& x, Vec& y) const {
    y.resize(static_cast<Eigen::Index>(dim_));
    for (std::size_t r = 0; r < dim_; ++r) {
      typename Vec::Scalar acc(0);
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[cols_[k]];
      y[r] = acc;
    }
  }
  // y += a * A x
  template <class Vec>
  void apply_add(double a, const Vec& x, Vec& y) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      typename Vec::Scalar acc(0);
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[cols_[k]];
      y[r] += a * acc;
    }
  }
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    apply(x, y);
    return y;
  }

  double expectation(const Eigen::VectorXd& v) const { return v.dot(*this * v); }
  double expectation(const Eigen::VectorXcd& v) const;
  double matrix_element(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return a.dot(*this * b);
  }

  // Weighted sum of operators sharing a dimension.
  static SparseOperator combine(const std::vector<std::pair<double, const SparseOperator*>>& terms);

  // Incremental row-by-row assembly.
  class RowBuilder {
   public:
    explicit RowBuilder(std::size_t dim);
    void add(Index col, double v) { row_.emplace_back(col, v); }
    void end_row();
    SparseOperator finish();

   private:
    std::size_t dim_;
    std::vector<std::pair<Index, double>> row_;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> cols_;
    std::vector<double> vals_;
  };

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> vals_;
  bool diagonal_only_ = true;

  void refresh_flags();
};

// Apply a permutation matrix: (P x)[perm[k]] = x[k].
Eigen::VectorXd permute(const std::vector<std::size_t>& perm, const Eigen::VectorXd& x);

}  // namespace rydcft
