#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace copula {

namespace detail {

inline void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << what << " = " << x << " lies outside [0,1]";
    throw DomainError(os.str());
  }
}

/// Cell index of x in the uniform n-partition, right-continuous: a point on
/// an interior boundary belongs to the cell on its right; x = 1 belongs to
/// the last cell.
inline std::size_t cell_of(double x, std::size_t n) {
  const double s = x * static_cast<double>(n);
  const auto k = static_cast<std::size_t>(std::floor(s));
  return std::min(k, n - 1);
}

/// Left-continuous variant: a boundary point belongs to the cell on its left;
/// x = 0 belongs to the first cell.
inline std::size_t left_cell_of(double x, std::size_t n) {
  const double s = x * static_cast<double>(n);
  const double c = std::ceil(s);
  if (c <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(c) - 1, n - 1);
}

}  // namespace detail

/// Checkerboard copula of resolution n. Entry a(k,l) is n times the mass of
/// the cell (k/n,(k+1)/n) x (l/n,(l+1)/n); the mass is spread uniformly over
/// the cell, so the copula is bilinear on every cell and all algebra on it is
/// exact up to rounding.
class GridCopula {
 public:
  static constexpr double kValidationTol = 1e-9;

  /// Validates that `a` is doubly stochastic within `tol`. Never renormalizes.
  explicit GridCopula(SquareMatrix a, double tol = kValidationTol) : a_(std::move(a)) {
    const std::size_t n = a_.n();
    if (n == 0) throw DomainError("grid resolution must be positive");
    for (double x : a_.data()) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw InvalidCopula("checkerboard matrix has a negative or non-finite entry");
    }
    const auto rs = a_.row_sums();
    const auto cs = a_.col_sums();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(rs[i] - 1.0) > tol || std::abs(cs[i] - 1.0) > tol) {
        std::ostringstream os;
        os << "matrix is not doubly stochastic: row " << i << " sums to " << rs[i]
           << ", column " << i << " sums to " << cs[i];
        throw InvalidCopula(os.str());
      }
    }
    build_prefix();
  }

  static GridCopula from_rows(const std::vector<std::vector<double>>& rows,
                              double tol = kValidationTol) {
    return GridCopula(SquareMatrix::from_rows(rows), tol);
  }

  /// Sinkhorn balancing of a nonnegative matrix with positive row and column
  /// sums. Only used on explicit request.
  static GridCopula renormalized(SquareMatrix a, int max_iter = 100000, double tol = 1e-14) {
    const std::size_t n = a.n();
    for (int it = 0; it < max_iter; ++it) {
      const auto rs = a.row_sums();
      for (std::size_t i = 0; i < n; ++i) {
        if (!(rs[i] > 0.0)) throw InvalidCopula("cannot renormalize: zero row");
        for (std::size_t j = 0; j < n; ++j) a(i, j) /= rs[i];
      }
      const auto cs = a.col_sums();
      double worst = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(cs[j] > 0.0)) throw InvalidCopula("cannot renormalize: zero column");
        worst = std::max(worst, std::abs(cs[j] - 1.0));
        for (std::size_t i = 0; i < n; ++i) a(i, j) /= cs[j];
      }
      if (worst < tol) break;
    }
    return GridCopula(std::move(a));
  }

  /// Discretization of C+ (the identity matrix).
  static GridCopula upper(std::size_t n) { return GridCopula(SquareMatrix::identity(n)); }
  /// Discretization of C- (the anti-diagonal permutation).
  static GridCopula lower(std::size_t n) { return GridCopula(SquareMatrix::reversal(n)); }
  /// Discretization of the product copula, which it reproduces exactly.
  static GridCopula product(std::size_t n) {
    return GridCopula(SquareMatrix(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t n() const { return a_.n(); }
  const SquareMatrix& matrix() const { return a_; }
  double operator()(std::size_t k, std::size_t l) const { return a_(k, l); }

  /// C(k/n, l/n) for 0 <= k, l <= n.
  double corner(std::size_t k, std::size_t l) const {
    return prefix_[k * (n() + 1) + l] / static_cast<double>(n());
  }

  double eval(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    const std::size_t n = this->n();
    const double nd = static_cast<double>(n);
    const std::size_t k = detail::cell_of(u, n);
    const std::size_t l = detail::cell_of(v, n);
    const double fu = u * nd - static_cast<double>(k);
    const double fv = v * nd - static_cast<double>(l);
    const double s00 = prefix_at(k, l);
    const double s10 = prefix_at(k + 1, l);
    const double s01 = prefix_at(k, l + 1);
    return (s00 + fu * (s10 - s00) + fv * (s01 - s00) + fu * fv * a_(k, l)) / nd;
  }

  /// d/du C(u,v); right-continuous in u.
  double d1(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    const std::size_t n = this->n();
    const std::size_t k = detail::cell_of(u, n);
    const std::size_t l = detail::cell_of(v, n);
    const double fv = v * static_cast<double>(n) - static_cast<double>(l);
    double acc = 0.0;
    for (std::size_t j = 0; j < l; ++j) acc += a_(k, j);
    return acc + fv * a_(k, l);
  }

  /// d/dv C(u,v); right-continuous in v.
  double d2(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return column_derivative(u, detail::cell_of(v, n()));
  }

  /// Left-hand derivative in v.
  double d2_left(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return column_derivative(u, detail::left_cell_of(v, n()));
  }

  /// Smallest t with d1(u,t) >= w: the conditional quantile of V given U = u.
  double conditional_quantile(double u, double w) const {
    detail::require_unit(u, "u");
    detail::require_unit(w, "w");
    const std::size_t n = this->n();
    const std::size_t k = detail::cell_of(u, n);
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double a = a_(k, l);
      if (a > 0.0 && acc + a >= w) {
        const double frac = std::clamp((w - acc) / a, 0.0, 1.0);
        return (static_cast<double>(l) + frac) / static_cast<double>(n);
      }
      acc += a;
    }
    return 1.0;
  }

  GridCopula transposed() const { return GridCopula(a_.transposed()); }

  /// Same copula at resolution n * factor: every cell splits into
  /// factor x factor subcells carrying a(k,l) / factor each.
  GridCopula refined(std::size_t factor) const {
    if (factor == 0) throw DomainError("refinement factor must be positive");
    if (factor == 1) return *this;
    const std::size_t n = this->n();
    const std::size_t m = n * factor;
    const double scale = 1.0 / static_cast<double>(factor);
    SquareMatrix r(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) r(i, j) = a_(i / factor, j / factor) * scale;
    return GridCopula(std::move(r));
  }

  bool operator==(const GridCopula& other) const { return a_ == other.a_; }

 private:
  void build_prefix() {
    const std::size_t n = this->n();
    prefix_.assign((n + 1) * (n + 1), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double row_acc = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        row_acc += a_(k, l);
        prefix_[(k + 1) * (n + 1) + l + 1] = prefix_[k * (n + 1) + l + 1] + row_acc;
      }
    }
  }

  double prefix_at(std::size_t k, std::size_t l) const { return prefix_[k * (n() + 1) + l]; }

  double column_derivative(double u, std::size_t l) const {
    const std::size_t n = this->n();
    const std::size_t k = detail::cell_of(u, n);
    const double fu = u * static_cast<double>(n) - static_cast<double>(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += a_(i, l);
    return acc + fu * a_(k, l);
  }

  SquareMatrix a_;
  std::vector<double> prefix_;  // (n+1)^2 sums of a over [0,k) x [0,l)
};

}  // namespace copula
