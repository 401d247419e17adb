#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "hyla/dense.hpp"

namespace hyla::sparse {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within a row and no explicit zeros are stored. Immutable.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  // Validates every structural invariant; throws ContractError on violation.
  CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
            std::vector<std::size_t> col_indices, std::vector<double> values);

  // Duplicate (row, col) pairs are summed; entries summing to zero are dropped.
  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<Triplet> triplets);
  static CsrMatrix identity(std::size_t n, double diagonal = 1.0);
  // Drops exact zeros.
  static CsrMatrix from_dense(const Matrix& dense);

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  // Stored value or 0.
  double at(std::size_t r, std::size_t c) const;

  CsrMatrix transpose() const;
  Matrix to_dense() const;
  std::vector<Triplet> triplets() const;
  bool is_symmetric() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Binary n×n adjacency. Duplicates collapse to a single 1; with `symmetrize`
/// both orientations are stored. Self-loops are kept as given.
/// `line_base` > 0 makes out-of-range errors report edge k as line
/// line_base + k (used by the loaders).
CsrMatrix csr_from_edges(std::size_t n, const std::vector<Edge>& edges, bool symmetrize,
                         std::size_t line_base = 1);

// Upper-triangular (u ≤ v) pairs of a symmetric pattern, row-major order.
std::vector<Edge> undirected_edges(const CsrMatrix& adjacency);

/// S = D̃^{−1/2}(A + I)D̃^{−1/2}, where any existing diagonal is replaced by 1
/// and D̃ holds the row sums of A + I. Throws ContractError on a non-square
/// or asymmetric input, or on negative weights.
CsrMatrix normalize_adjacency(const CsrMatrix& a);

Matrix spmm(const CsrMatrix& m, const Matrix& x);

// S applied K times to X without forming S^K.
Matrix propagate_k(const CsrMatrix& s, const Matrix& x, std::size_t k);

}  // namespace hyla::sparse
