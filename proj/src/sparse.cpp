#include "hyla/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyla/errors.hpp"
#include "hyla/parallel.hpp"

namespace hyla::sparse {

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0) {
    throw ContractError("CsrMatrix: row_offsets must have n_rows + 1 entries starting at 0");
  }
  if (col_indices_.size() != values_.size() || row_offsets_.back() != values_.size()) {
    throw ContractError("CsrMatrix: last row offset must equal the number of stored values");
  }
  for (std::size_t r = 0; r < n_rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) {
      throw ContractError("CsrMatrix: row_offsets not monotone at row " + std::to_string(r));
    }
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] >= n_cols_) {
        throw ContractError("CsrMatrix: column index out of range in row " + std::to_string(r));
      }
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
        throw ContractError("CsrMatrix: columns not strictly increasing in row " +
                            std::to_string(r));
      }
      if (values_[k] == 0.0) {
        throw ContractError("CsrMatrix: explicit zero stored in row " + std::to_string(r));
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) throw ContractError("from_triplets: index out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const auto row = triplets[i].row;
    const auto col = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i) {
      sum += triplets[i].value;
    }
    if (sum == 0.0) continue;
    cols.push_back(col);
    vals.push_back(sum);
    ++offsets[row + 1];
  }
  for (std::size_t r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
  return CsrMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::identity(std::size_t n, double diagonal) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, diagonal));
}

CsrMatrix CsrMatrix::from_dense(const Matrix& dense) {
  std::vector<std::size_t> offsets(dense.rows() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    const auto row = dense.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != 0.0) {
        cols.push_back(c);
        vals.push_back(row[c]);
      }
    }
    offsets[r + 1] = vals.size();
  }
  return CsrMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols),
                   std::move(vals));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
  const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<std::size_t> offsets(n_cols_ + 1, 0);
  for (auto c : col_indices_) ++offsets[c + 1];
  for (std::size_t c = 0; c < n_cols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> cols(nnz());
  std::vector<double> vals(nnz());
  // Row-major scan keeps the new column indices sorted.
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const auto dst = cursor[col_indices_[k]]++;
      cols[dst] = r;
      vals[dst] = values_[k];
    }
  }
  return CsrMatrix(n_cols_, n_rows_, std::move(offsets), std::move(cols), std::move(vals));
}

Matrix CsrMatrix::to_dense() const {
  Matrix out(n_rows_, n_cols_);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      out(r, col_indices_[k]) = values_[k];
    }
  }
  return out;
}

std::vector<Triplet> CsrMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      out.push_back({r, col_indices_[k], values_[k]});
    }
  }
  return out;
}

bool CsrMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  return *this == transpose();
}

CsrMatrix csr_from_edges(std::size_t n, const std::vector<Edge>& edges, bool symmetrize,
                         std::size_t line_base) {
  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * (symmetrize ? 2 : 1));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    if (u >= n || v >= n) {
      throw IngestError("edges", line_base + k,
                        "node index out of range [0, " + std::to_string(n) + ")");
    }
    triplets.push_back({u, v, 1.0});
    if (symmetrize && u != v) triplets.push_back({v, u, 1.0});
  }
  // Collapse duplicates to a binary pattern.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  triplets.erase(std::unique(triplets.begin(), triplets.end(),
                             [](const Triplet& a, const Triplet& b) {
                               return a.row == b.row && a.col == b.col;
                             }),
                 triplets.end());
  return CsrMatrix::from_triplets(n, n, std::move(triplets));
}

std::vector<Edge> undirected_edges(const CsrMatrix& adjacency) {
  std::vector<Edge> out;
  for (const auto& t : adjacency.triplets()) {
    if (t.row <= t.col) out.emplace_back(t.row, t.col);
  }
  return out;
}

CsrMatrix normalize_adjacency(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw ContractError("normalize_adjacency: matrix is not square");
  if (!a.is_symmetric()) throw ContractError("normalize_adjacency: adjacency is not symmetric");
  for (double v : a.values()) {
    if (v < 0.0) throw ContractError("normalize_adjacency: negative edge weight");
  }
  const std::size_t n = a.rows();
  std::vector<Triplet> with_loops;
  with_loops.reserve(a.nnz() + n);
  for (const auto& t : a.triplets()) {
    if (t.row != t.col) with_loops.push_back(t);
  }
  for (std::size_t i = 0; i < n; ++i) with_loops.push_back({i, i, 1.0});
  const CsrMatrix tilde = CsrMatrix::from_triplets(n, n, std::move(with_loops));

  std::vector<double> degree(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = tilde.row_offsets()[r]; k < tilde.row_offsets()[r + 1]; ++k) {
      degree[r] += tilde.values()[k];
    }
  }
  std::vector<double> vals(tilde.values());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = tilde.row_offsets()[r]; k < tilde.row_offsets()[r + 1]; ++k) {
      vals[k] /= std::sqrt(degree[r] * degree[tilde.col_indices()[k]]);
    }
  }
  return CsrMatrix(n, n, tilde.row_offsets(), tilde.col_indices(), std::move(vals));
}

Matrix spmm(const CsrMatrix& m, const Matrix& x) {
  if (m.cols() != x.rows()) {
    throw ConfigError("spmm: sparse has " + std::to_string(m.cols()) + " columns, dense has " +
                      std::to_string(x.rows()) + " rows");
  }
  Matrix out(m.rows(), x.cols());
  const auto& offsets = m.row_offsets();
  const auto& cols = m.col_indices();
  const auto& vals = m.values();
  parallel_for(m.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(r);
      for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
        const double v = vals[k];
        const auto src = x.row(cols[k]);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += v * src[j];
      }
    }
  });
  return out;
}

Matrix propagate_k(const CsrMatrix& s, const Matrix& x, std::size_t k) {
  Matrix out = x;
  for (std::size_t step = 0; step < k; ++step) out = spmm(s, out);
  return out;
}

}  // namespace hyla::sparse
