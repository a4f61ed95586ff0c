#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"

namespace copula {

/// Dense row-major square matrix. Just enough linear algebra for the
/// doubly stochastic matrices carried by checkerboard copulas.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static SquareMatrix identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// The permutation matrix reversing index order (1 on the anti-diagonal).
  static SquareMatrix reversal(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, n - 1 - i) = 1.0;
    return m;
  }

  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw DomainError("matrix is not square");
      std::copy(rows[i].begin(), rows[i].end(), m.a_.begin() + i * n);
    }
    return m;
  }

  std::size_t n() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  std::span<const double> data() const { return a_; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  SquareMatrix transposed() const {
    SquareMatrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Rows in reverse order; bit-exact (no arithmetic).
  SquareMatrix rows_reversed() const {
    SquareMatrix r(n_);
    for (std::size_t i = 0; i < n_; ++i)
      std::copy(row(n_ - 1 - i).begin(), row(n_ - 1 - i).end(), r.a_.begin() + i * n_);
    return r;
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) s[i] += (*this)(i, j);
    return s;
  }

  std::vector<double> col_sums() const {
    std::vector<double> s(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) s[j] += (*this)(i, j);
    return s;
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != n_) throw DomainError("vector length does not match matrix");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += (*this)(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) {
    if (x.n_ != y.n_) throw DomainError("matrix sizes differ");
    const std::size_t n = x.n_;
    SquareMatrix z(n);
    // i-k-j order keeps the inner loop contiguous.
    for (std::size_t i = 0; i < n; ++i) {
      double* zi = z.a_.data() + i * n;
      for (std::size_t k = 0; k < n; ++k) {
        const double xik = x(i, k);
        if (xik == 0.0) continue;
        const double* yk = y.a_.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) zi[j] += xik * yk[j];
      }
    }
    return z;
  }

  double max_abs_diff(const SquareMatrix& other) const {
    if (other.n_ != n_) throw DomainError("matrix sizes differ");
    double d = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) d = std::max(d, std::abs(a_[i] - other.a_[i]));
    return d;
  }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

}  // namespace copula
