#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace copula {

/// Piecewise-constant function on the uniform n-partition of [0,1];
/// values[k] is the value on ((k)/n, (k+1)/n).
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("step function needs at least one cell");
  }

  /// 1 on the first `cells` cells, 0 elsewhere: the indicator of [0, cells/n].
  static StepFunction lower_indicator(std::size_t n, std::size_t cells) {
    if (cells > n) throw DomainError("indicator wider than the partition");
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 0; k < cells; ++k) v[k] = 1.0;
    return StepFunction(std::move(v));
  }

  std::size_t n() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  double integral() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) /
           static_cast<double>(values_.size());
  }

  /// Largest upward step, i.e. how far the function is from being decreasing.
  double increase_violation() const {
    double worst = 0.0;
    for (std::size_t k = 1; k < values_.size(); ++k)
      worst = std::max(worst, values_[k] - values_[k - 1]);
    return worst;
  }

  double decrease_violation() const {
    double worst = 0.0;
    for (std::size_t k = 1; k < values_.size(); ++k)
      worst = std::max(worst, values_[k - 1] - values_[k]);
    return worst;
  }

  // Weak monotonicity; plateaus allowed.
  bool is_decreasing(double tol = 0.0) const { return increase_violation() <= tol; }
  bool is_increasing(double tol = 0.0) const { return decrease_violation() <= tol; }

 private:
  std::vector<double> values_;
};

}  // namespace copula
