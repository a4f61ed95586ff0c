#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <vector>

#include "algebra.hpp"
#include "metrics.hpp"
#include "monotonicity.hpp"

namespace copula {

struct IterateStep {
  std::size_t step = 0;
  double d_inf_gap = 0.0;  // d_inf(C^{*step}, C^{*(step+1)})
  double d1_gap = 0.0;     // D1 between the same iterates
};

struct IterateReport {
  std::size_t n_steps = 0;
  Copula limit = Copula::upper();
  IntervalFamily intervals;
  DecompositionReport decomposition;
  double sup_gap = 0.0;
  /// Largest pointwise increase C^{*(k+1)} - C^{*k} seen; the iterates of an
  /// SI copula decrease, so this stays at rounding level.
  double monotone_decrease_violation = 0.0;
  bool converged = false;
  std::vector<IterateStep> history;
};

/// Iterates C, C*C, C*C*C, ... of a copula that is stochastically increasing
/// in the first component until consecutive iterates are within `tol` in
/// d_inf, and decomposes the limit into its ordinal-sum-of-product blocks.
/// An input that is already idempotent is returned unchanged after one step.
inline IterateReport iterate_to_limit(const Copula& c, double tol, std::size_t max_iter,
                                      const AlgebraConfig& cfg = {},
                                      double decomposition_tol = 1e-6) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (max_iter == 0) throw DomainError("max_iter must be positive");
  const GridCopula g = c.grid() ? *c.grid() : as_grid(c, cfg.resolution);
  const auto si = check_si(Copula(g), 1, 1e-12);
  if (!si.si) {
    std::ostringstream os;
    os << "input is not stochastically increasing in the first component (violation "
       << si.max_violation << " at u in [" << si.x1 << ", " << si.x2 << "], v = " << si.y << ")";
    throw NotStochasticallyIncreasing(os.str());
  }

  IterateReport rep;
  const auto first = certify_idempotent(c, tol, cfg);
  AlgebraConfig first_cfg = cfg;
  if (first.resolution) first_cfg.resolution = first.resolution;
  const Copula sq = markov_product(c, c, first_cfg);
  const Copula base = sq.grid() ? Copula(as_grid(c, sq.grid()->n())) : c;
  rep.history.push_back({1, first.gap, d1_metric(base, sq, first_cfg)});
  rep.monotone_decrease_violation = max_excess(sq, base).value;
  if (first.idempotent) {
    rep.n_steps = 1;
    rep.limit = c;
    rep.sup_gap = first.gap;
    rep.converged = true;
    rep.decomposition = extract_pi_ordinal_structure(c, decomposition_tol);
    rep.intervals = rep.decomposition.intervals;
    return rep;
  }

  GridCopula cur = markov_product(g, g, cfg.cap);
  rep.n_steps = 1;
  rep.sup_gap = first.gap;
  for (std::size_t step = 2; step <= max_iter; ++step) {
    GridCopula next = markov_product(g, cur, cfg.cap);
    const auto d = grid_sup_distance(cur, next);
    rep.history.push_back({step, d.value, detail::d1_grid(cur, next)});
    rep.monotone_decrease_violation =
        std::max(rep.monotone_decrease_violation, max_excess(Copula(next), Copula(cur)).value);
    rep.n_steps = step;
    rep.sup_gap = d.value;
    cur = std::move(next);
    if (d.value < tol) {
      rep.converged = true;
      break;
    }
  }
  rep.limit = Copula(cur);
  rep.decomposition = extract_pi_ordinal_structure(rep.limit, decomposition_tol);
  rep.intervals = rep.decomposition.intervals;
  return rep;
}

}  // namespace copula
