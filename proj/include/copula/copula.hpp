#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid_copula.hpp"
#include "interval_family.hpp"
#include "json.hpp"

namespace copula {

enum class Kind { Grid, Product, Upper, Lower, Archimedean, ExtremeValue, OrdinalSum, Transpose };

/// Finite-difference step for partial derivatives without a closed form.
inline constexpr double kDerivativeStep = 1e-6;

/// Interface implemented by every copula representation. Arguments are
/// validated by the Copula handle before they reach a model.
class CopulaModel {
 public:
  virtual ~CopulaModel() = default;

  virtual Kind kind() const = 0;
  virtual double eval(double u, double v) const = 0;
  virtual nlohmann::json to_json() const = 0;

  /// Central difference with step kDerivativeStep, one-sided at the boundary.
  virtual double d1(double u, double v) const {
    return std::clamp(difference(u, [&](double x) { return eval(x, v); }), 0.0, 1.0);
  }
  virtual double d2(double u, double v) const {
    return std::clamp(difference(v, [&](double y) { return eval(u, y); }), 0.0, 1.0);
  }
  virtual double d2_left(double u, double v) const {
    const double h = kDerivativeStep;
    if (v < h) return d2(u, v);
    return std::clamp((eval(u, v) - eval(u, v - h)) / h, 0.0, 1.0);
  }

  /// Smallest t with d1(u,t) >= w, by bisection on the nondecreasing map
  /// t -> d1(u,t).
  virtual double conditional_quantile(double u, double w) const {
    if (w <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (d1(u, mid) >= w)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

 protected:
  template <class F>
  static double difference(double x, F&& f) {
    const double h = kDerivativeStep;
    if (x - h < 0.0) return (f(x + h) - f(x)) / h;
    if (x + h > 1.0) return (f(x) - f(x - h)) / h;
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }
};

/// Value-semantic handle to an immutable copula model. Copies share the model.
class Copula {
 public:
  explicit Copula(std::shared_ptr<const CopulaModel> model) : model_(std::move(model)) {}
  Copula(GridCopula grid);  // NOLINT: a checkerboard is a copula

  static Copula product();
  static Copula upper();
  static Copula lower();

  Kind kind() const { return model_->kind(); }
  const CopulaModel& model() const { return *model_; }

  /// The checkerboard behind this copula, if it is one.
  const GridCopula* grid() const;

  double eval(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return model_->eval(u, v);
  }
  double operator()(double u, double v) const { return eval(u, v); }

  double d1(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return model_->d1(u, v);
  }
  double d2(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return model_->d2(u, v);
  }
  double d2_left(double u, double v) const {
    detail::require_unit(u, "u");
    detail::require_unit(v, "v");
    return model_->d2_left(u, v);
  }
  double conditional_quantile(double u, double w) const {
    detail::require_unit(u, "u");
    detail::require_unit(w, "w");
    return model_->conditional_quantile(u, w);
  }

  nlohmann::json to_json() const { return model_->to_json(); }

 private:
  std::shared_ptr<const CopulaModel> model_;
};

namespace detail {

class GridModel final : public CopulaModel {
 public:
  explicit GridModel(GridCopula g) : g_(std::move(g)) {}
  Kind kind() const override { return Kind::Grid; }
  double eval(double u, double v) const override { return g_.eval(u, v); }
  double d1(double u, double v) const override { return g_.d1(u, v); }
  double d2(double u, double v) const override { return g_.d2(u, v); }
  double d2_left(double u, double v) const override { return g_.d2_left(u, v); }
  double conditional_quantile(double u, double w) const override {
    return g_.conditional_quantile(u, w);
  }
  nlohmann::json to_json() const override {
    return {{"type", "checkerboard"}, {"matrix", g_.matrix().rows()}};
  }
  const GridCopula& grid() const { return g_; }

 private:
  GridCopula g_;
};

class ProductModel final : public CopulaModel {
 public:
  Kind kind() const override { return Kind::Product; }
  double eval(double u, double v) const override { return u * v; }
  double d1(double, double v) const override { return v; }
  double d2(double u, double) const override { return u; }
  double d2_left(double u, double) const override { return u; }
  double conditional_quantile(double, double w) const override { return w; }
  nlohmann::json to_json() const override { return {{"type", "product"}}; }
};

class UpperModel final : public CopulaModel {
 public:
  Kind kind() const override { return Kind::Upper; }
  double eval(double u, double v) const override { return std::min(u, v); }
  double d1(double u, double v) const override { return (u < v || v >= 1.0) ? 1.0 : 0.0; }
  double d2(double u, double v) const override { return (v < u || u >= 1.0) ? 1.0 : 0.0; }
  double d2_left(double u, double v) const override { return (u > 0.0 && v <= u) ? 1.0 : 0.0; }
  double conditional_quantile(double u, double w) const override { return w <= 0.0 ? 0.0 : u; }
  nlohmann::json to_json() const override { return {{"type", "frechet-upper"}}; }
};

class LowerModel final : public CopulaModel {
 public:
  Kind kind() const override { return Kind::Lower; }
  double eval(double u, double v) const override { return std::max(u + v - 1.0, 0.0); }
  double d1(double u, double v) const override { return (v > 0.0 && u + v >= 1.0) ? 1.0 : 0.0; }
  double d2(double u, double v) const override { return (u > 0.0 && u + v >= 1.0) ? 1.0 : 0.0; }
  double d2_left(double u, double v) const override { return (u + v > 1.0) ? 1.0 : 0.0; }
  double conditional_quantile(double u, double w) const override {
    return w <= 0.0 ? 0.0 : 1.0 - u;
  }
  nlohmann::json to_json() const override { return {{"type", "frechet-lower"}}; }
};

/// (u,v) -> C(v,u).
class TransposeModel final : public CopulaModel {
 public:
  explicit TransposeModel(Copula inner) : inner_(std::move(inner)) {}
  Kind kind() const override { return Kind::Transpose; }
  double eval(double u, double v) const override { return inner_.model().eval(v, u); }
  double d1(double u, double v) const override { return inner_.model().d2(v, u); }
  double d2(double u, double v) const override { return inner_.model().d1(v, u); }
  nlohmann::json to_json() const override {
    return {{"type", "transpose"}, {"of", inner_.to_json()}};
  }
  const Copula& inner() const { return inner_; }

 private:
  Copula inner_;
};

/// Rescaled components on the diagonal blocks (a_k,b_k)^2, C+ elsewhere.
class OrdinalSumModel final : public CopulaModel {
 public:
  OrdinalSumModel(IntervalFamily family, std::vector<Copula> components)
      : family_(std::move(family)), components_(std::move(components)) {
    if (family_.size() != components_.size())
      throw InvalidCopula("ordinal sum needs one component per interval");
  }

  Kind kind() const override { return Kind::OrdinalSum; }

  double eval(double u, double v) const override {
    for (std::size_t k = 0; k < family_.size(); ++k) {
      const auto& iv = family_[k];
      if (iv.contains_open(u) && iv.contains_open(v)) {
        const double w = iv.length();
        return iv.lo + w * components_[k].model().eval(scaled(u, iv), scaled(v, iv));
      }
    }
    return std::min(u, v);
  }

  // Right-continuous in u: a block's left endpoint already uses the block.
  double d1(double u, double v) const override {
    for (std::size_t k = 0; k < family_.size(); ++k) {
      const auto& iv = family_[k];
      if (u >= iv.lo && u < iv.hi && iv.contains_open(v))
        return components_[k].model().d1(scaled(u, iv), scaled(v, iv));
    }
    return (u < v || v >= 1.0) ? 1.0 : 0.0;
  }

  double d2(double u, double v) const override {
    for (std::size_t k = 0; k < family_.size(); ++k) {
      const auto& iv = family_[k];
      if (v >= iv.lo && v < iv.hi && iv.contains_open(u))
        return components_[k].model().d2(scaled(u, iv), scaled(v, iv));
    }
    return (v < u || u >= 1.0) ? 1.0 : 0.0;
  }

  double d2_left(double u, double v) const override {
    for (std::size_t k = 0; k < family_.size(); ++k) {
      const auto& iv = family_[k];
      if (v > iv.lo && v <= iv.hi && iv.contains_open(u))
        return components_[k].model().d2_left(scaled(u, iv), scaled(v, iv));
    }
    return (u > 0.0 && v <= u) ? 1.0 : 0.0;
  }

  nlohmann::json to_json() const override {
    nlohmann::json ivs = nlohmann::json::array();
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& iv : family_) ivs.push_back({iv.lo, iv.hi});
    for (const auto& c : components_) comps.push_back(c.to_json());
    return {{"type", "ordinal-sum"}, {"intervals", ivs}, {"components", comps}};
  }

  const IntervalFamily& family() const { return family_; }
  const std::vector<Copula>& components() const { return components_; }

 private:
  static double scaled(double x, const Interval& iv) {
    return std::clamp((x - iv.lo) / iv.length(), 0.0, 1.0);
  }

  IntervalFamily family_;
  std::vector<Copula> components_;
};

}  // namespace detail

inline Copula::Copula(GridCopula grid)
    : model_(std::make_shared<detail::GridModel>(std::move(grid))) {}

inline Copula Copula::product() {
  static const auto m = std::make_shared<detail::ProductModel>();
  return Copula(m);
}
inline Copula Copula::upper() {
  static const auto m = std::make_shared<detail::UpperModel>();
  return Copula(m);
}
inline Copula Copula::lower() {
  static const auto m = std::make_shared<detail::LowerModel>();
  return Copula(m);
}

inline const GridCopula* Copula::grid() const {
  if (model_->kind() != Kind::Grid) return nullptr;
  return &static_cast<const detail::GridModel&>(*model_).grid();
}

/// Ordinal sum with respect to `family`; an empty family gives C+.
inline Copula ordinal_sum(IntervalFamily family, std::vector<Copula> components) {
  return Copula(std::make_shared<detail::OrdinalSumModel>(std::move(family),
                                                          std::move(components)));
}

/// Ordinal sum of copies of the product copula.
inline Copula ordinal_sum_of_product(IntervalFamily family) {
  std::vector<Copula> comps(family.size(), Copula::product());
  return ordinal_sum(std::move(family), std::move(comps));
}

}  // namespace copula
