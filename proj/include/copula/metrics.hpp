#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "algebra.hpp"
#include "distance.hpp"
#include "monotonicity.hpp"

namespace copula {

/// Simpson nodes on [0,1] for one-dimensional integrals.
inline constexpr std::size_t kSimpsonNodes = 1025;
/// Panels in u for two-dimensional midpoint integration.
inline constexpr std::size_t kMidpointPanels = 512;

inline double d_inf(const Copula& a, const Copula& b) { return sup_distance(a, b).value; }

namespace detail {

/// Mean of |y| over a segment on which y runs linearly from y0 to y1.
inline double mean_abs_linear(double y0, double y1) {
  if ((y0 >= 0.0 && y1 >= 0.0) || (y0 <= 0.0 && y1 <= 0.0)) return 0.5 * std::abs(y0 + y1);
  return 0.5 * (y0 * y0 + y1 * y1) / (std::abs(y0) + std::abs(y1));
}

/// D1 between checkerboards of equal resolution: on cell row k the derivative
/// gap is piecewise linear in v, so the integral is a closed-form sum.
inline double d1_grid(const GridCopula& a, const GridCopula& b) {
  const std::size_t n = a.n();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double y0 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double y1 = y0 + (a(k, l) - b(k, l));
      total += mean_abs_linear(y0, y1);
      y0 = y1;
    }
  }
  const double nd = static_cast<double>(n);
  return total / (nd * nd);
}

}  // namespace detail

/// D1(C1, C2) = integral over the unit square of |d1 C1 - d1 C2|. Exact for
/// checkerboards (after common refinement). Otherwise a midpoint rule with
/// kMidpointPanels panels in u and twice as many in v, so that every u node
/// sits on a v panel edge, where the jumps of d1 C+ and d1 C- fall.
inline double d1_metric(const Copula& a, const Copula& b, const AlgebraConfig& cfg = {}) {
  const GridCopula* ga = a.grid();
  const GridCopula* gb = b.grid();
  if (ga && gb) {
    const std::size_t r = detail::common_resolution(ga->n(), gb->n(), cfg.cap);
    return detail::d1_grid(as_grid(a, r), as_grid(b, r));
  }
  const std::size_t mu = kMidpointPanels, mv = 2 * kMidpointPanels;
  double total = 0.0;
  for (std::size_t i = 0; i < mu; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(mu);
    double row = 0.0;
    for (std::size_t j = 0; j < mv; ++j) {
      const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(mv);
      row += std::abs(a.model().d1(u, v) - b.model().d1(u, v));
    }
    total += row / static_cast<double>(mv);
  }
  return total / static_cast<double>(mu);
}

/// Composite Simpson rule on [0,1] with an odd number of nodes.
template <class F>
double simpson(F&& f, std::size_t nodes = kSimpsonNodes) {
  if (nodes < 3 || nodes % 2 == 0) throw DomainError("Simpson needs an odd node count >= 3");
  const double h = 1.0 / static_cast<double>(nodes - 1);
  double acc = f(0.0) + f(1.0);
  for (std::size_t i = 1; i + 1 < nodes; ++i)
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(static_cast<double>(i) * h);
  return acc * h / 3.0;
}

/// 2 * int_0^1 (C * C)(u,u) du. For a symmetric idempotent C this is the
/// squared Sobolev norm; it equals 2/3 for the product copula.
inline double sobolev_diagonal(const Copula& c, const AlgebraConfig& cfg = {}) {
  const Copula p = markov_product(c, c, cfg);
  const auto& m = p.model();
  return 2.0 * simpson([&m](double u) { return m.eval(u, u); });
}

/// max |d1 C1 - d1 C2| at interior points: u at the centers of an N-cell
/// partition, v at its interior corners.
inline double max_derivative_gap(const Copula& a, const Copula& b, std::size_t cells = 96) {
  double worst = 0.0;
  const double nd = static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / nd;
    for (std::size_t j = 1; j < cells; ++j) {
      const double v = static_cast<double>(j) / nd;
      worst = std::max(worst, std::abs(a.model().d1(u, v) - b.model().d1(u, v)));
    }
  }
  return worst;
}

struct NqdIdempotentVerdict {
  bool nqd = false;
  double d_inf_to_product = 0.0;
  double sobolev = 0.0;
  /// True when C is not NQD (nothing asserted) or when both consequences hold:
  /// d_inf(C, product) <= 10 tol and sobolev_diagonal within 10 tol of 2/3.
  bool passed = false;
};

/// The only NQD idempotent copula is the product copula; checks that
/// consequence on an idempotent input.
inline NqdIdempotentVerdict nqd_idempotent_check(const Copula& c, double tol,
                                                 const AlgebraConfig& cfg = {}) {
  const auto idem = is_idempotent(c, tol, cfg);
  if (!idem.idempotent) throw NotIdempotent("input is not idempotent within tolerance");
  NqdIdempotentVerdict r;
  const auto q = check_quadrant_dependence(c, tol);
  r.nqd = q.kind == QuadrantDependence::NQD || q.kind == QuadrantDependence::Both;
  if (!r.nqd) {
    r.passed = true;
    return r;
  }
  r.d_inf_to_product = d_inf(c, Copula::product());
  r.sobolev = sobolev_diagonal(c, cfg);
  r.passed = r.d_inf_to_product <= 10.0 * tol && std::abs(r.sobolev - 2.0 / 3.0) <= 10.0 * tol;
  return r;
}

}  // namespace copula
