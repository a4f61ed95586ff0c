#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "copula.hpp"

namespace copula {

/// Points per axis of the uniform audit grid.
inline constexpr std::size_t kAuditPoints = 257;

/// Sorted axis coordinates of the audit grid: the uniform 257-point grid plus
/// every cell corner of the checkerboards among `cs`.
inline std::vector<double> audit_axis(std::initializer_list<const Copula*> cs,
                                      std::size_t points = kAuditPoints) {
  std::vector<double> axis;
  const double m = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) axis.push_back(static_cast<double>(i) / m);
  for (const Copula* c : cs) {
    if (const GridCopula* g = c->grid()) {
      const double n = static_cast<double>(g->n());
      for (std::size_t k = 0; k <= g->n(); ++k) axis.push_back(static_cast<double>(k) / n);
    }
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

struct SupDistance {
  double value = 0.0;
  double u = 0.0;  // where the maximum is attained
  double v = 0.0;
};

/// sup |a - b| over the cell corners of two checkerboards of equal
/// resolution. Exact: the difference is bilinear on every cell.
inline SupDistance grid_sup_distance(const GridCopula& a, const GridCopula& b) {
  if (a.n() != b.n()) throw DomainError("grid resolutions differ");
  const std::size_t n = a.n();
  SupDistance d;
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t l = 0; l <= n; ++l) {
      const double diff = std::abs(a.corner(k, l) - b.corner(k, l));
      if (diff > d.value) {
        d.value = diff;
        d.u = static_cast<double>(k) / static_cast<double>(n);
        d.v = static_cast<double>(l) / static_cast<double>(n);
      }
    }
  }
  return d;
}

/// d_inf with the point where it is attained. Exact for checkerboards of the
/// same resolution, otherwise the maximum over the audit grid.
inline SupDistance sup_distance(const Copula& a, const Copula& b) {
  const GridCopula* ga = a.grid();
  const GridCopula* gb = b.grid();
  if (ga && gb && ga->n() == gb->n()) return grid_sup_distance(*ga, *gb);
  const auto axis = audit_axis({&a, &b});
  SupDistance d;
  for (double u : axis) {
    for (double v : axis) {
      const double diff = std::abs(a.model().eval(u, v) - b.model().eval(u, v));
      if (diff > d.value) d = {diff, u, v};
    }
  }
  return d;
}

}  // namespace copula
