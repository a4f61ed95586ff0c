#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "core.hpp"
#include "distance.hpp"
#include "families.hpp"

namespace copula {

struct AlgebraConfig {
  /// Resolution at which analytic operands are discretized.
  std::size_t resolution = 128;
  /// Largest grid resolution the common refinement may reach.
  std::size_t cap = 4096;
};

namespace detail {

inline std::size_t common_resolution(std::size_t a, std::size_t b, std::size_t cap) {
  const std::size_t r = std::lcm(a, b);
  if (r > cap) {
    std::ostringstream os;
    os << "common resolution " << r << " of grids " << a << " and " << b
       << " exceeds the cap " << cap;
    throw ResolutionOverflow(os.str());
  }
  return r;
}

}  // namespace detail

/// Markov product of two checkerboards: the matrix product, after refining
/// both to the least common multiple of their resolutions.
inline GridCopula markov_product(const GridCopula& a, const GridCopula& b,
                                 std::size_t cap = AlgebraConfig{}.cap) {
  if (a.n() == b.n()) return GridCopula(a.matrix() * b.matrix());
  const std::size_t r = detail::common_resolution(a.n(), b.n(), cap);
  return GridCopula(a.refined(r / a.n()).matrix() * b.refined(r / b.n()).matrix());
}

/// Markov product (C1 * C2)(u,v) = int d2 C1(u,t) d1 C2(t,v) dt.
///
/// C+ is the identity and the product copula annihilates; those identities,
/// and C- * C- = C+, are applied exactly. Everything else goes through the
/// checkerboard path: analytic operands are discretized at a resolution that
/// is a multiple of every grid operand's resolution and of cfg.resolution.
inline Copula markov_product(const Copula& a, const Copula& b, const AlgebraConfig& cfg = {}) {
  if (a.kind() == Kind::Upper) return b;
  if (b.kind() == Kind::Upper) return a;
  if (a.kind() == Kind::Product || b.kind() == Kind::Product) return Copula::product();
  if (a.kind() == Kind::Lower && b.kind() == Kind::Lower) return Copula::upper();

  const GridCopula* ga = a.grid();
  const GridCopula* gb = b.grid();
  if (ga && gb) return markov_product(*ga, *gb, cfg.cap);

  std::size_t r = cfg.resolution;
  if (ga) r = detail::common_resolution(r, ga->n(), cfg.cap);
  if (gb) r = detail::common_resolution(r, gb->n(), cfg.cap);
  if (r > cfg.cap) throw ResolutionOverflow("configured resolution exceeds the cap");
  return markov_product(as_grid(a, r), as_grid(b, r), cfg.cap);
}

/// Midpoint rule with m panels for the defining integral of the Markov
/// product. Exact for checkerboards when m is a multiple of both resolutions.
inline std::function<double(double, double)> quadrature_markov_product(const Copula& a,
                                                                      const Copula& b,
                                                                      std::size_t m) {
  if (m < 8) throw DomainError("quadrature needs at least 8 panels");
  return [a, b, m](double u, double v) {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    const double h = 1.0 / static_cast<double>(m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double t = (static_cast<double>(j) + 0.5) * h;
      acc += a.model().d2(u, t) * b.model().d1(t, v);
    }
    return acc * h;
  };
}

/// (u,v) -> C(v,u).
inline Copula transpose(const Copula& c) {
  if (const GridCopula* g = c.grid()) return Copula(g->transposed());
  switch (c.kind()) {
    case Kind::Product:
    case Kind::Upper:
    case Kind::Lower:
    case Kind::Archimedean: return c;
    case Kind::Transpose: return static_cast<const detail::TransposeModel&>(c.model()).inner();
    case Kind::OrdinalSum: {
      const auto& os = static_cast<const detail::OrdinalSumModel&>(c.model());
      std::vector<Copula> comps;
      for (const auto& comp : os.components()) comps.push_back(transpose(comp));
      return ordinal_sum(os.family(), std::move(comps));
    }
    default: return Copula(std::make_shared<detail::TransposeModel>(c));
  }
}

/// C -> C- * C, which exchanges stochastic increase and decrease in the first
/// component. On checkerboards this reverses the row order, so applying it
/// twice is bit-exact.
inline Copula si_sd_involution(const Copula& c, const AlgebraConfig& cfg = {}) {
  switch (c.kind()) {
    case Kind::Upper: return Copula::lower();
    case Kind::Lower: return Copula::upper();
    case Kind::Product: return Copula::product();
    default: break;
  }
  const GridCopula g = c.grid() ? *c.grid() : as_grid(c, cfg.resolution);
  return Copula(GridCopula(g.matrix().rows_reversed()));
}

/// n-fold Markov product by repeated squaring.
inline GridCopula power(const GridCopula& c, std::size_t n) {
  if (n == 0) throw DomainError("power needs n >= 1");
  GridCopula result = c;
  GridCopula base = c;
  bool first = true;
  while (n > 0) {
    if (n & 1U) {
      result = first ? base : GridCopula(result.matrix() * base.matrix());
      first = false;
    }
    n >>= 1U;
    if (n > 0) base = GridCopula(base.matrix() * base.matrix());
  }
  return result;
}

inline Copula power(const Copula& c, std::size_t n, const AlgebraConfig& cfg = {}) {
  if (n == 0) throw DomainError("power needs n >= 1");
  switch (c.kind()) {
    case Kind::Upper:
    case Kind::Product: return c;
    case Kind::Lower: return n % 2 == 0 ? Copula::upper() : c;
    default: break;
  }
  return Copula(power(c.grid() ? *c.grid() : as_grid(c, cfg.resolution), n));
}

struct IdempotencyReport {
  bool idempotent = false;
  double gap = 0.0;  // d_inf(C * C, C)
  double u = 0.0;    // witness of the gap
  double v = 0.0;
  std::size_t resolution = 0;  // grid of the comparison, 0 if none was needed
};

/// d_inf(C * C, C) <= tol. For an analytic C whose product is computed on a
/// grid, the comparison is against C discretized at the same resolution,
/// i.e. idempotency is certified at grid resolution.
inline IdempotencyReport is_idempotent(const Copula& c, double tol, const AlgebraConfig& cfg = {}) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const Copula p = markov_product(c, c, cfg);
  SupDistance d;
  std::size_t n = 0;
  if (const GridCopula* gp = p.grid()) {
    d = grid_sup_distance(*gp, as_grid(c, gp->n()));
    n = gp->n();
  } else {
    d = sup_distance(p, c);
  }
  return {d.value <= tol, d.value, d.u, d.v, n};
}

/// Smallest resolution n <= cap at which every endpoint of `f` is a multiple
/// of 1/n (within tol), if any.
inline std::optional<std::size_t> aligned_resolution(const IntervalFamily& f, std::size_t cap,
                                                     double tol = 1e-9) {
  for (std::size_t n = 1; n <= cap; ++n) {
    const double nd = static_cast<double>(n);
    bool ok = true;
    for (const auto& iv : f) {
      for (double x : {iv.lo, iv.hi}) {
        const double s = x * nd;
        if (std::abs(s - std::round(s)) > tol * nd) ok = false;
      }
      if (!ok) break;
    }
    if (ok) return n;
  }
  return std::nullopt;
}

struct DecompositionReport {
  IntervalFamily intervals;
  std::vector<double> block_gaps;  // d_inf of each rescaled block to the product copula
  double max_block_gap = 0.0;
  bool verified = false;
};

namespace detail {

inline double golden_minimum(const std::function<double(double)>& f, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

/// Recovers the interval family of an idempotent, stochastically monotone
/// copula, which is an ordinal sum of the product copula. The blocks are the
/// complement in (0,1) of the fixed set {v : v - C(v,v) <= tol} of the
/// diagonal, located on a grid of step 1/diagonal_points (plus the cell
/// corners of a checkerboard) with refinement of isolated zeros and of the
/// block endpoints. Each block, rescaled to the unit square, is then compared
/// with the product copula.
inline DecompositionReport extract_pi_ordinal_structure(const Copula& c, double tol = 1e-6,
                                                        std::size_t diagonal_points = 1024) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const auto& m = c.model();
  auto gap = [&m](double x) { return x - m.eval(x, x); };

  std::vector<double> pts;
  for (std::size_t i = 0; i <= diagonal_points; ++i)
    pts.push_back(static_cast<double>(i) / static_cast<double>(diagonal_points));
  const GridCopula* g = c.grid();
  if (g) {
    for (std::size_t k = 0; k <= g->n(); ++k)
      pts.push_back(static_cast<double>(k) / static_cast<double>(g->n()));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<double> gv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) gv[i] = gap(pts[i]);

  // Zeros of the diagonal gap strictly between sample points.
  std::vector<double> extra;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (gv[i] > tol && gv[i] <= gv[i - 1] && gv[i] <= gv[i + 1]) {
      const double x = detail::golden_minimum(gap, pts[i - 1], pts[i + 1]);
      if (gap(x) <= tol) extra.push_back(x);
    }
  }
  if (!extra.empty()) {
    pts.insert(pts.end(), extra.begin(), extra.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    gv.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) gv[i] = gap(pts[i]);
  }

  std::vector<bool> fixed(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) fixed[i] = gv[i] <= tol;
  fixed.front() = fixed.back() = true;

  auto is_corner = [g](double x) {
    if (!g) return false;
    const double s = x * static_cast<double>(g->n());
    return std::abs(s - std::round(s)) < 1e-9;
  };
  // Boundary of the fixed set between a fixed and a non-fixed sample. On a
  // checkerboard the diagonal gap is quadratic per cell, so the boundary is
  // the fixed corner itself.
  auto boundary = [&](std::size_t fixed_idx, std::size_t free_idx) {
    double in = pts[fixed_idx];
    double out = pts[free_idx];
    if (is_corner(in)) return in;
    const double thr = std::max(gv[fixed_idx], 1e-15);
    for (int it = 0; it < 200 && std::abs(out - in) > 1e-16; ++it) {
      const double mid = 0.5 * (in + out);
      if (gap(mid) <= thr)
        in = mid;
      else
        out = mid;
    }
    return std::abs(in - pts[fixed_idx]) <= 1e-12 ? pts[fixed_idx] : in;
  };

  std::vector<Interval> blocks;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (fixed[i] && !fixed[i + 1]) {
      std::size_t j = i + 1;
      while (!fixed[j]) ++j;
      const double a = boundary(i, i + 1);
      const double b = boundary(j, j - 1);
      if (a < b) blocks.push_back({std::max(a, 0.0), std::min(b, 1.0)});
      i = j - 1;
    }
  }

  DecompositionReport rep;
  rep.intervals = IntervalFamily(std::move(blocks));
  const std::size_t audit = 129;
  for (const auto& iv : rep.intervals) {
    const double w = iv.length();
    double worst = 0.0;
    for (std::size_t i = 0; i < audit; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(audit - 1);
      for (std::size_t j = 0; j < audit; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(audit - 1);
        const double x = std::clamp(iv.lo + w * s, 0.0, 1.0);
        const double y = std::clamp(iv.lo + w * t, 0.0, 1.0);
        const double rescaled = (m.eval(x, y) - iv.lo) / w;
        worst = std::max(worst, std::abs(rescaled - s * t));
      }
    }
    rep.block_gaps.push_back(worst);
    rep.max_block_gap = std::max(rep.max_block_gap, worst);
  }
  rep.verified = rep.max_block_gap <= 10.0 * tol;
  return rep;
}

/// is_idempotent for analytic inputs on a grid aligned with the diagonal
/// blocks of C: an ordinal sum of the product copula coincides with its
/// checkerboard at any resolution that is a multiple of every block endpoint's
/// denominator. The aligned resolution is doubled up to cfg.resolution.
/// Checkerboards, and inputs without a verified aligned block structure, go
/// through is_idempotent unchanged.
inline IdempotencyReport certify_idempotent(const Copula& c, double tol, const AlgebraConfig& cfg = {}) {
  if (c.grid()) return is_idempotent(c, tol, cfg);
  switch (c.kind()) {
    case Kind::Product:
    case Kind::Upper: return is_idempotent(c, tol, cfg);
    default: break;
  }
  const auto rep = extract_pi_ordinal_structure(c, std::max(tol, 1e-9));
  if (rep.verified) {
    if (auto n = aligned_resolution(rep.intervals, cfg.cap)) {
      AlgebraConfig aligned = cfg;
      aligned.resolution = *n;
      while (aligned.resolution < cfg.resolution && aligned.resolution * 2 <= cfg.cap)
        aligned.resolution *= 2;
      return is_idempotent(c, tol, aligned);
    }
  }
  return is_idempotent(c, tol, cfg);
}

}  // namespace copula
