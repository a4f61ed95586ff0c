#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "copula/all.hpp"

namespace testing {

inline copula::GridCopula a3() {
  return copula::GridCopula::from_rows(
      {{2.0 / 3, 0.0, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.0, 2.0 / 3, 1.0 / 3}});
}

inline std::vector<double> unit_grid(std::size_t points) {
  std::vector<double> xs;
  for (std::size_t i = 0; i < points; ++i) xs.push_back(static_cast<double>(i) / (points - 1));
  return xs;
}

// Cell-mass oracle: C(k/n, l/n) = (1/n) sum of a(i,j) over i < k, j < l.
inline double corner_by_mass(const copula::SquareMatrix& a, std::size_t k, std::size_t l) {
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j) s += a(i, j);
  return s / static_cast<double>(a.n());
}

// Plain triple loop, independent of SquareMatrix::operator*.
inline std::vector<std::vector<double>> naive_product(const copula::SquareMatrix& a,
                                                      const copula::SquareMatrix& b) {
  const std::size_t n = a.n();
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) r[i][j] += a(i, k) * b(k, j);
  return r;
}

}  // namespace testing
