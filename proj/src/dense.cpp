#include "hyla/dense.hpp"

#include <algorithm>
#include <cmath>

#include "hyla/errors.hpp"
#include "hyla/parallel.hpp"

namespace hyla {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ConfigError("Matrix: data size does not match shape");
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto dst = out.row(i);
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        auto src = b.row(k);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
      }
    }
  });
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ConfigError("matmul_tn: row counts differ");
  Matrix out(a.cols(), b.cols());
  // Parallel over output rows; each entry sums over a.rows() in index order.
  parallel_for(a.cols(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = 0; k < a.rows(); ++k) {
      auto src = b.row(k);
      for (std::size_t i = begin; i < end; ++i) {
        const double aki = a(k, i);
        if (aki == 0.0) continue;
        auto dst = out.row(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aki * src[j];
      }
    }
  });
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ConfigError("matmul_nt: column counts differ");
  Matrix out(a.rows(), b.rows());
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
    }
  });
  return out;
}

Matrix scaled(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& v : out.values()) v *= factor;
  return out;
}

Matrix hconcat(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) throw ConfigError("hconcat: row counts differ");
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t i = 0; i < left.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(left.row(i).begin(), left.row(i).end(), dst.begin());
    std::copy(right.row(i).begin(), right.row(i).end(), dst.begin() + left.cols());
  }
  return out;
}

Matrix left_columns(const Matrix& a, std::size_t cols) {
  if (cols > a.cols()) throw ConfigError("left_columns: too many columns requested");
  if (cols == a.cols()) return a;
  Matrix out(a.rows(), cols);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy_n(a.row(i).begin(), cols, out.row(i).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("max_abs_diff: shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace hyla
