#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "algebra.hpp"
#include "random.hpp"
#include "step_function.hpp"

namespace copula {

/// Verdict on stochastic monotonicity in one component. For component i the
/// witness (x1, x2, y) names two values x1 < x2 of the i-th argument and the
/// value y of the other at which the partial derivative moves the wrong way.
struct MonotonicityVerdict {
  bool si = false;
  bool sd = false;
  int component = 1;
  double max_violation = 0.0;
  double x1 = 0.0, x2 = 0.0, y = 0.0;
  bool exact = false;  // exact cumulative-sum check, not a grid certificate
};

/// Resolution of the analytic concavity certificate.
inline constexpr std::size_t kConcavityPoints = 257;
inline constexpr std::size_t kConcavitySlices = 65;

namespace detail {

struct MonotonicityScan {
  double si_violation = 0.0, sd_violation = 0.0;
  double si_w[3] = {0, 0, 0}, sd_w[3] = {0, 0, 0};
  bool exact = false;
};

/// On a checkerboard, d_1 C(., l/n) equals the cumulative row sum
/// S_k(l) = a(k,0) + ... + a(k,l-1) on cell k. SI means S_k(l) is
/// non-increasing in k for every l, SD non-decreasing.
inline MonotonicityScan scan_grid(const SquareMatrix& a) {
  const std::size_t n = a.n();
  const double nd = static_cast<double>(n);
  MonotonicityScan s;
  s.exact = true;
  std::vector<double> prev(n + 1, 0.0), cur(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    cur[0] = 0.0;
    for (std::size_t l = 0; l < n; ++l) cur[l + 1] = cur[l] + a(k, l);
    if (k > 0) {
      // l = n is the margin (both rows sum to one), nothing to check there.
      for (std::size_t l = 1; l < n; ++l) {
        const double inc = cur[l] - prev[l];
        const double x1 = (static_cast<double>(k) - 0.5) / nd;
        const double x2 = (static_cast<double>(k) + 0.5) / nd;
        const double y = static_cast<double>(l) / nd;
        if (inc > s.si_violation) {
          s.si_violation = inc;
          s.si_w[0] = x1, s.si_w[1] = x2, s.si_w[2] = y;
        }
        if (-inc > s.sd_violation) {
          s.sd_violation = -inc;
          s.sd_w[0] = x1, s.sd_w[1] = x2, s.sd_w[2] = y;
        }
      }
    }
    std::swap(prev, cur);
  }
  return s;
}

/// Concavity (SI) or convexity (SD) of x -> C(x, y) through slope changes on
/// a uniform grid.
template <class Eval>
MonotonicityScan scan_sections(Eval&& eval) {
  MonotonicityScan s;
  const double h = 1.0 / static_cast<double>(kConcavityPoints - 1);
  std::vector<double> c(kConcavityPoints);
  for (std::size_t j = 1; j + 1 < kConcavitySlices; ++j) {
    const double y = static_cast<double>(j) / static_cast<double>(kConcavitySlices - 1);
    for (std::size_t i = 0; i < kConcavityPoints; ++i) c[i] = eval(static_cast<double>(i) * h, y);
    for (std::size_t i = 1; i + 1 < kConcavityPoints; ++i) {
      const double change = (c[i + 1] - 2.0 * c[i] + c[i - 1]) / h;
      const double x1 = static_cast<double>(i - 1) * h, x2 = static_cast<double>(i + 1) * h;
      if (change > s.si_violation) {
        s.si_violation = change;
        s.si_w[0] = x1, s.si_w[1] = x2, s.si_w[2] = y;
      }
      if (-change > s.sd_violation) {
        s.sd_violation = -change;
        s.sd_w[0] = x1, s.sd_w[1] = x2, s.sd_w[2] = y;
      }
    }
  }
  return s;
}

inline MonotonicityScan scan(const Copula& c, int component) {
  if (component != 1 && component != 2) throw DomainError("component must be 1 or 2");
  if (const GridCopula* g = c.grid())
    return scan_grid(component == 1 ? g->matrix() : g->matrix().transposed());
  const auto& m = c.model();
  if (component == 1) return scan_sections([&m](double x, double y) { return m.eval(x, y); });
  return scan_sections([&m](double x, double y) { return m.eval(y, x); });
}

inline MonotonicityVerdict make_verdict(const MonotonicityScan& s, int component, double tol,
                                        bool for_si) {
  MonotonicityVerdict v;
  v.si = s.si_violation <= tol;
  v.sd = s.sd_violation <= tol;
  v.component = component;
  v.exact = s.exact;
  v.max_violation = for_si ? s.si_violation : s.sd_violation;
  const double* w = for_si ? s.si_w : s.sd_w;
  v.x1 = w[0], v.x2 = w[1], v.y = w[2];
  return v;
}

}  // namespace detail

/// Stochastic increase in the given component (non-strict: plateaus allowed).
/// Exact on checkerboards; for analytic copulas certified through concavity
/// of the sections on a 257 x 65 grid. max_violation and the witness refer to
/// the SI property; `sd` is reported alongside.
inline MonotonicityVerdict check_si(const Copula& c, int component, double tol = 0.0) {
  if (!(tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
  return detail::make_verdict(detail::scan(c, component), component, tol, true);
}

/// As check_si, with max_violation and the witness referring to SD.
inline MonotonicityVerdict check_sd(const Copula& c, int component, double tol = 0.0) {
  if (!(tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
  return detail::make_verdict(detail::scan(c, component), component, tol, false);
}

struct SignedGap {
  double value = 0.0;  // max of (a - b), never below 0
  double u = 0.0, v = 0.0;
};

/// max(a - b) over the cell corners when both are checkerboards of the same
/// resolution (exact), over the audit grid otherwise.
inline SignedGap max_excess(const Copula& a, const Copula& b) {
  SignedGap g;
  const GridCopula* ga = a.grid();
  const GridCopula* gb = b.grid();
  if (ga && gb && ga->n() == gb->n()) {
    const std::size_t n = ga->n();
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t l = 0; l <= n; ++l) {
        const double d = ga->corner(k, l) - gb->corner(k, l);
        if (d > g.value)
          g = {d, static_cast<double>(k) / static_cast<double>(n),
               static_cast<double>(l) / static_cast<double>(n)};
      }
    return g;
  }
  const auto axis = audit_axis({&a, &b});
  for (double u : axis)
    for (double v : axis) {
      const double d = a.model().eval(u, v) - b.model().eval(u, v);
      if (d > g.value) g = {d, u, v};
    }
  return g;
}

struct DominanceReport {
  bool holds = false;
  double max_violation = 0.0;
  double u = 0.0, v = 0.0;
};

/// D * C <= C + tol everywhere (the SI side). With `reversed`, checks
/// C <= D * C + tol instead (the SD side).
inline DominanceReport check_dominance(const Copula& d, const Copula& c, double tol,
                                       bool reversed = false, const AlgebraConfig& cfg = {}) {
  const Copula p = markov_product(d, c, cfg);
  // Compare on p's grid: c agrees with its checkerboard at every corner.
  Copula ref = c;
  if (const GridCopula* gp = p.grid()) {
    if (!c.grid() || gp->n() % c.grid()->n() == 0) ref = Copula(as_grid(c, gp->n()));
  }
  const SignedGap g = reversed ? max_excess(ref, p) : max_excess(p, ref);
  return {g.value <= tol, g.value, g.u, g.v};
}

struct ViolationSearch {
  bool found = false;
  std::size_t trials = 0;
  double max_violation = 0.0;
  double u = 0.0, v = 0.0;
};

/// Looks for a copula D with D * C > C somewhere. Tries first, for every
/// level l, the permutation that sorts the cumulative rows S_k(l) into
/// decreasing order, then random permutations and random doubly stochastic
/// matrices. Finding nothing is inconclusive: it does not certify SI.
inline ViolationSearch search_dominance_violation(const GridCopula& c, std::size_t max_trials,
                                                  std::uint64_t seed, double tol = 1e-12) {
  const std::size_t n = c.n();
  const Copula cc(c);
  ViolationSearch out;
  auto try_d = [&](const GridCopula& d) {
    ++out.trials;
    const Copula p(markov_product(d, c));
    const SignedGap g = max_excess(p, cc);
    if (g.value > out.max_violation) {
      out.max_violation = g.value;
      out.u = g.u, out.v = g.v;
    }
    out.found = out.max_violation > tol;
  };

  std::set<std::vector<std::size_t>> tried;
  std::vector<double> cum(n);
  for (std::size_t l = 1; l < n && out.trials < max_trials && !out.found; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += c(k, j);
      cum[k] = s;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return cum[x] > cum[y]; });
    if (tried.insert(order).second) try_d(GridCopula(permutation_matrix(order)));
  }

  std::mt19937_64 rng(seed);
  while (out.trials < max_trials && !out.found) {
    if (out.trials % 2 == 0)
      try_d(GridCopula(permutation_matrix(random_permutation(n, rng))));
    else
      try_d(random_doubly_stochastic(n, rng));
  }
  return out;
}

enum class QuadrantDependence { PQD, NQD, Neither, Both };

inline const char* to_string(QuadrantDependence q) {
  switch (q) {
    case QuadrantDependence::PQD: return "PQD";
    case QuadrantDependence::NQD: return "NQD";
    case QuadrantDependence::Neither: return "neither";
    case QuadrantDependence::Both: return "both";
  }
  return "?";
}

struct QuadrantReport {
  QuadrantDependence kind = QuadrantDependence::Neither;
  double max_above_product = 0.0;  // max(C - uv)
  double max_below_product = 0.0;  // max(uv - C)
};

/// PQD iff C >= uv - tol, NQD iff C <= uv + tol on the audit grid.
inline QuadrantReport check_quadrant_dependence(const Copula& c, double tol) {
  QuadrantReport r;
  const auto axis = audit_axis({&c});
  for (double u : axis)
    for (double v : axis) {
      const double d = c.model().eval(u, v) - u * v;
      r.max_above_product = std::max(r.max_above_product, d);
      r.max_below_product = std::max(r.max_below_product, -d);
    }
  const bool pqd = r.max_below_product <= tol;
  const bool nqd = r.max_above_product <= tol;
  r.kind = pqd && nqd ? QuadrantDependence::Both
           : pqd      ? QuadrantDependence::PQD
           : nqd      ? QuadrantDependence::NQD
                      : QuadrantDependence::Neither;
  return r;
}

struct CompleteDependenceReport {
  bool holds = false;
  double gap = 0.0;  // d_inf(C^T * C, C+)
};

/// Left invertibility: C^T * C = C+. For checkerboards the comparison is with
/// the identity matrix at the same resolution.
inline CompleteDependenceReport check_complete_dependence(const Copula& c, double tol,
                                                          const AlgebraConfig& cfg = {}) {
  const Copula p = markov_product(transpose(c), c, cfg);
  double gap;
  if (const GridCopula* g = p.grid())
    gap = grid_sup_distance(*g, GridCopula::upper(g->n())).value;
  else
    gap = sup_distance(p, Copula::upper()).value;
  return {gap <= tol, gap};
}

struct OperatorMonotonicity {
  bool preserves = false;  // decreasing input mapped to decreasing output
  bool reverses = false;   // ... to increasing output
  StepFunction output;
  double max_violation = 0.0;  // largest upward step of the output
};

/// Applies the Markov operator of C (at the resolution of f) to a decreasing
/// step function and checks the image is decreasing.
inline OperatorMonotonicity operator_preserves_monotone(const Copula& c, const StepFunction& f,
                                                        double tol = 1e-12) {
  if (!f.is_decreasing(0.0)) throw DomainError("input step function is not decreasing");
  const GridCopula g = as_grid(c, f.n());
  OperatorMonotonicity r;
  r.output = StepFunction(g.matrix().apply(f.values()));
  r.max_violation = r.output.increase_violation();
  r.preserves = r.max_violation <= tol;
  r.reverses = r.output.decrease_violation() <= tol;
  return r;
}

struct EmpiricalSiReport {
  std::vector<double> bin_means;
  std::vector<double> bin_sds;
  std::vector<std::size_t> bin_counts;
  std::vector<double> noise_bands;  // for each adjacent pair (b, b+1)
  std::size_t violations = 0;       // increases beyond the noise band
  double max_increase = 0.0;        // largest raw increase between adjacent bins
  bool insufficient = false;        // some bin holds fewer than 50 samples
};

/// Half-width multiplier of the CLT noise band.
inline constexpr double kNoiseBandZ = 4.0;
inline constexpr std::size_t kMinSamplesPerBin = 50;

/// Monte Carlo check that x -> E(f(V) | U = x) is decreasing for decreasing f:
/// samples from C, bins by u and compares adjacent conditional means against
/// a CLT band.
inline EmpiricalSiReport empirical_si_check(const Copula& c, const std::function<double(double)>& f,
                                            std::size_t samples, std::size_t bins,
                                            std::uint64_t seed) {
  if (bins == 0) throw DomainError("need at least one bin");
  for (std::size_t i = 1; i <= 1000; ++i) {
    const double a = static_cast<double>(i - 1) / 1000.0, b = static_cast<double>(i) / 1000.0;
    if (f(b) > f(a)) throw DomainError("test function is not decreasing");
  }
  const auto pairs = sample(c, samples, seed);
  EmpiricalSiReport r;
  std::vector<double> sum(bins, 0.0), sq(bins, 0.0);
  r.bin_counts.assign(bins, 0);
  for (const auto& [u, v] : pairs) {
    const std::size_t b = detail::cell_of(u, bins);
    const double y = f(v);
    sum[b] += y;
    sq[b] += y * y;
    ++r.bin_counts[b];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double n = static_cast<double>(r.bin_counts[b]);
    if (r.bin_counts[b] < kMinSamplesPerBin) r.insufficient = true;
    const double mean = n > 0 ? sum[b] / n : 0.0;
    const double var = n > 1 ? std::max(0.0, (sq[b] - n * mean * mean) / (n - 1)) : 0.0;
    r.bin_means.push_back(mean);
    r.bin_sds.push_back(std::sqrt(var));
  }
  for (std::size_t b = 0; b + 1 < bins; ++b) {
    const double n0 = std::max<double>(1.0, static_cast<double>(r.bin_counts[b]));
    const double n1 = std::max<double>(1.0, static_cast<double>(r.bin_counts[b + 1]));
    const double band = kNoiseBandZ * std::sqrt(r.bin_sds[b] * r.bin_sds[b] / n0 +
                                                 r.bin_sds[b + 1] * r.bin_sds[b + 1] / n1);
    r.noise_bands.push_back(band);
    const double inc = r.bin_means[b + 1] - r.bin_means[b];
    r.max_increase = std::max(r.max_increase, inc);
    if (inc > band) ++r.violations;
  }
  return r;
}

}  // namespace copula
