#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "grid_copula.hpp"

namespace copula {

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Matrix with a 1 at (i, perm[i]).
inline SquareMatrix permutation_matrix(const std::vector<std::size_t>& perm) {
  SquareMatrix m(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) m(i, perm[i]) = 1.0;
  return m;
}

/// Random convex combination of `terms` random permutation matrices
/// (Birkhoff-von Neumann), so doubly stochastic up to rounding.
inline GridCopula random_doubly_stochastic(std::size_t n, std::mt19937_64& rng,
                                           std::size_t terms = 0) {
  if (terms == 0) terms = n + 1;
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(terms);
  for (double& x : w) x = expo(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  SquareMatrix m(n);
  for (std::size_t t = 0; t < terms; ++t) {
    const auto p = random_permutation(n, rng);
    const double wt = w[t] / total;
    for (std::size_t i = 0; i < n; ++i) m(i, p[i]) += wt;
  }
  return GridCopula(std::move(m));
}

}  // namespace copula
