#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "copula.hpp"

namespace copula {

struct Rect {
  double u1 = 0.0, u2 = 1.0, v1 = 0.0, v2 = 1.0;
};

/// H-volumes below this are treated as rounding noise by discretize.
inline constexpr double kVolumeTol = 1e-12;

inline double eval(const Copula& c, double u, double v) { return c.eval(u, v); }

inline double h_volume(const Copula& c, const Rect& r) {
  detail::require_unit(r.u1, "u1");
  detail::require_unit(r.u2, "u2");
  detail::require_unit(r.v1, "v1");
  detail::require_unit(r.v2, "v2");
  if (r.u1 > r.u2 || r.v1 > r.v2) throw DomainError("malformed rectangle");
  const auto& m = c.model();
  return m.eval(r.u2, r.v2) - m.eval(r.u2, r.v1) - m.eval(r.u1, r.v2) + m.eval(r.u1, r.v1);
}

/// Partial derivative in component 1 or 2. Piecewise-constant derivatives are
/// right-continuous in the differentiated variable.
inline double partial_derivative(const Copula& c, int component, double u, double v) {
  if (component == 1) return c.d1(u, v);
  if (component == 2) return c.d2(u, v);
  throw DomainError("component must be 1 or 2");
}

/// Checkerboard approximation: a(k,l) = n * H-volume of cell (k,l).
/// Checkerboards at a resolution dividing n are refined exactly instead.
inline GridCopula discretize(const Copula& c, std::size_t n) {
  if (n == 0) throw DomainError("resolution must be positive");
  if (const GridCopula* g = c.grid()) {
    if (g->n() == n) return *g;
    if (n % g->n() == 0) return g->refined(n / g->n());
  }
  switch (c.kind()) {
    case Kind::Product: return GridCopula::product(n);
    case Kind::Upper: return GridCopula::upper(n);
    case Kind::Lower: return GridCopula::lower(n);
    default: break;
  }
  const auto& m = c.model();
  const double nd = static_cast<double>(n);
  std::vector<double> corners((n + 1) * (n + 1));
  for (std::size_t k = 0; k <= n; ++k)
    for (std::size_t l = 0; l <= n; ++l)
      corners[k * (n + 1) + l] =
          m.eval(static_cast<double>(k) / nd, static_cast<double>(l) / nd);
  auto at = [&](std::size_t k, std::size_t l) { return corners[k * (n + 1) + l]; };
  SquareMatrix a(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double vol = at(k + 1, l + 1) - at(k + 1, l) - at(k, l + 1) + at(k, l);
      if (vol < -kVolumeTol) {
        std::ostringstream os;
        os << "negative H-volume " << vol << " on cell (" << k << ", " << l
           << "): input is not 2-increasing";
        throw InvalidCopula(os.str());
      }
      a(k, l) = std::max(vol, 0.0) * nd;
    }
  }
  return GridCopula(std::move(a));
}

/// The checkerboard of `c` at resolution n (exact for checkerboards whose
/// resolution divides n).
inline GridCopula as_grid(const Copula& c, std::size_t n) { return discretize(c, n); }

/// i.i.d. pairs: u uniform, v the conditional quantile at an independent
/// uniform. Deterministic given the seed.
inline std::vector<std::pair<double, double>> sample(const Copula& c, std::size_t count,
                                                     std::uint64_t seed) {
  if (count == 0) throw DomainError("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = unif(rng);
    const double w = unif(rng);
    out.emplace_back(u, c.model().conditional_quantile(u, w));
  }
  return out;
}

}  // namespace copula
