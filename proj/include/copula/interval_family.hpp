#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace copula {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains_open(double x) const { return lo < x && x < hi; }
  bool operator==(const Interval&) const = default;
};

/// Finite family of disjoint open subintervals of (0,1), sorted by left
/// endpoint. Adjacent intervals may share an endpoint.
class IntervalFamily {
 public:
  IntervalFamily() = default;

  explicit IntervalFamily(std::vector<Interval> intervals)
      : intervals_(std::move(intervals)) {
    double prev_hi = 0.0;
    for (std::size_t k = 0; k < intervals_.size(); ++k) {
      const auto& iv = intervals_[k];
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo < 0.0 ||
          iv.hi > 1.0 || !(iv.lo < iv.hi)) {
        throw InvalidCopula("interval " + std::to_string(k) +
                            " is not a nonempty subinterval of [0,1]");
      }
      if (iv.lo < prev_hi) {
        throw InvalidCopula("intervals overlap or are unsorted at index " +
                            std::to_string(k));
      }
      prev_hi = iv.hi;
    }
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }
  const Interval& operator[](std::size_t k) const { return intervals_[k]; }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

  /// Index of the interval whose open interior contains x.
  std::optional<std::size_t> block_of(double x) const {
    for (std::size_t k = 0; k < intervals_.size(); ++k) {
      if (intervals_[k].contains_open(x)) return k;
      if (intervals_[k].lo >= x) break;
    }
    return std::nullopt;
  }

  /// Total length of the union.
  double measure() const {
    double m = 0.0;
    for (const auto& iv : intervals_) m += iv.length();
    return m;
  }

  /// Endpoint-wise comparison with absolute tolerance.
  bool approx_equal(const IntervalFamily& other, double tol) const {
    if (size() != other.size()) return false;
    for (std::size_t k = 0; k < size(); ++k) {
      if (std::abs(intervals_[k].lo - other[k].lo) > tol ||
          std::abs(intervals_[k].hi - other[k].hi) > tol) {
        return false;
      }
    }
    return true;
  }

  bool operator==(const IntervalFamily&) const = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace copula
