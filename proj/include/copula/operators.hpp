#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "core.hpp"
#include "step_function.hpp"

namespace copula {

/// Markov operator restricted to step functions on the uniform n-partition:
/// a doubly stochastic matrix acting on cell averages. Positivity, the fixed
/// point 1 and integral preservation are the nonnegativity, row sums and
/// column sums of the matrix.
class DiscreteMarkovOperator {
 public:
  explicit DiscreteMarkovOperator(SquareMatrix a, double tol = GridCopula::kValidationTol)
      : grid_(std::move(a), tol) {}

  std::size_t n() const { return grid_.n(); }
  const SquareMatrix& matrix() const { return grid_.matrix(); }

  StepFunction apply(const StepFunction& f) const {
    if (f.n() != n()) throw DomainError("step function resolution does not match operator");
    return StepFunction(matrix().apply(f.values()));
  }

  /// Composition: (S * T) f = S(T f).
  friend DiscreteMarkovOperator operator*(const DiscreteMarkovOperator& s,
                                          const DiscreteMarkovOperator& t) {
    return DiscreteMarkovOperator(s.matrix() * t.matrix());
  }

 private:
  GridCopula grid_;  // reuses the doubly stochastic validation
};

/// Operator of C at resolution n. For a checkerboard of resolution n this is
/// its own matrix: (T f)_k = sum_l a(k,l) f_l.
inline DiscreteMarkovOperator operator_of(const Copula& c, std::size_t n) {
  return DiscreteMarkovOperator(as_grid(c, n).matrix());
}

/// C_T(u,v) = int_0^u T 1_[0,v], which on step functions is the checkerboard
/// with T's matrix.
inline GridCopula copula_of(const DiscreteMarkovOperator& t) { return GridCopula(t.matrix()); }

/// Averaging over each block of cells, identity on cells outside any block.
/// Blocks are sets of 0-based cell indices.
inline DiscreteMarkovOperator averaging_operator(const std::vector<std::vector<std::size_t>>& blocks,
                                                 std::size_t n) {
  SquareMatrix a = SquareMatrix::identity(n);
  std::vector<bool> seen(n, false);
  for (const auto& b : blocks) {
    for (std::size_t i : b) {
      if (i >= n || seen[i]) throw DomainError("blocks must be disjoint cell indices below n");
      seen[i] = true;
    }
    const double w = 1.0 / static_cast<double>(b.size());
    for (std::size_t i : b) {
      a(i, i) = 0.0;
      for (std::size_t j : b) a(i, j) = w;
    }
  }
  return DiscreteMarkovOperator(std::move(a));
}

/// Conditional expectation given the sigma-field generated by the intervals
/// of F: block averages on each (a_k, b_k), identity elsewhere. Endpoints
/// must be multiples of 1/n.
inline DiscreteMarkovOperator conditional_expectation_form(const IntervalFamily& family,
                                                           std::size_t n) {
  if (n == 0) throw DomainError("resolution must be positive");
  const double nd = static_cast<double>(n);
  auto aligned = [&](double x) {
    const double s = x * nd;
    if (std::abs(s - std::round(s)) > 1e-9) {
      std::ostringstream os;
      os << "endpoint " << x << " is not a multiple of 1/" << n << "; nearest aligned value is "
         << std::round(s) / nd;
      throw DomainError(os.str());
    }
    return static_cast<std::size_t>(std::llround(s));
  };
  std::vector<std::vector<std::size_t>> blocks;
  for (const auto& iv : family) {
    const std::size_t lo = aligned(iv.lo), hi = aligned(iv.hi);
    std::vector<std::size_t> b(hi - lo);
    std::iota(b.begin(), b.end(), lo);
    blocks.push_back(std::move(b));
  }
  return averaging_operator(blocks, n);
}

/// Generating partition of the fixed sigma-field {A : T 1_A = 1_A} of an
/// idempotent operator, as sets of 0-based cell indices.
struct FixedPartition {
  std::vector<std::vector<std::size_t>> blocks;
  bool indicators_fixed = false;  // every block indicator is fixed by T within tol

  /// Interval family of the blocks with two or more cells, if every block is
  /// a run of consecutive cells. Singleton blocks are fixed cells.
  std::optional<IntervalFamily> intervals(std::size_t n) const {
    std::vector<Interval> out;
    for (const auto& b : blocks) {
      for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] != b[i - 1] + 1) return std::nullopt;
      if (b.size() >= 2)
        out.push_back({static_cast<double>(b.front()) / static_cast<double>(n),
                       static_cast<double>(b.back() + 1) / static_cast<double>(n)});
    }
    return IntervalFamily(std::move(out));
  }
};

/// Connected components of the support graph of an idempotent operator.
inline FixedPartition fixed_sigma_field(const DiscreteMarkovOperator& t, double tol) {
  const SquareMatrix& a = t.matrix();
  const std::size_t n = a.n();
  const double defect = (a * a).max_abs_diff(a);
  if (defect > tol) {
    std::ostringstream os;
    os << "operator is not idempotent: max |A^2 - A| = " << defect;
    throw NotIdempotent(os.str());
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) > tol) parent[find(i)] = find(j);

  FixedPartition p;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(p.blocks.size());
      p.blocks.emplace_back();
    }
    p.blocks[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  p.indicators_fixed = true;
  for (const auto& b : p.blocks) {
    std::vector<double> ind(n, 0.0);
    for (std::size_t i : b) ind[i] = 1.0;
    const auto img = a.apply(ind);
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(img[i] - ind[i]) > tol) p.indicators_fixed = false;
  }
  return p;
}

}  // namespace copula
