#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "copula.hpp"

namespace copula {

/// Uniform grid size used by the convexity certificates.
inline constexpr std::size_t kCertificatePoints = 1001;

/// Additive generator of a strict Archimedean copula: phi decreasing and
/// convex on [0, inf) with phi(0) = 1 and phi(inf) = 0.
class ArchimedeanGenerator {
 public:
  enum class Family { Independence, Clayton, Gumbel, Frank, Tabulated, Custom };

  using Fn = std::function<double(double)>;

  /// phi(t) = exp(-t); yields the product copula.
  static ArchimedeanGenerator independence() {
    ArchimedeanGenerator g(Family::Independence, 0.0);
    g.phi_ = [](double t) { return std::exp(-t); };
    g.dphi_ = [](double t) { return -std::exp(-t); };
    g.d2phi_ = [](double t) { return std::exp(-t); };
    g.inv_ = [](double u) { return -std::log(u); };
    return g;
  }

  /// phi(t) = (1 + theta t)^(-1/theta), theta > 0.
  static ArchimedeanGenerator clayton(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw InvalidCopula("Clayton generator needs theta > 0");
    ArchimedeanGenerator g(Family::Clayton, theta);
    g.phi_ = [theta](double t) { return std::exp(-std::log1p(theta * t) / theta); };
    g.dphi_ = [theta](double t) { return -std::exp(-(1.0 / theta + 1.0) * std::log1p(theta * t)); };
    g.d2phi_ = [theta](double t) {
      return (1.0 + theta) * std::exp(-(1.0 / theta + 2.0) * std::log1p(theta * t));
    };
    g.inv_ = [theta](double u) { return std::expm1(-theta * std::log(u)) / theta; };
    return g;
  }

  /// phi(t) = exp(-t^(1/theta)), theta >= 1.
  static ArchimedeanGenerator gumbel(double theta) {
    if (!(theta >= 1.0) || !std::isfinite(theta))
      throw InvalidCopula("Gumbel generator needs theta >= 1");
    ArchimedeanGenerator g(Family::Gumbel, theta);
    const double a = 1.0 / theta;
    g.phi_ = [a](double t) { return std::exp(-std::pow(t, a)); };
    g.dphi_ = [a](double t) {
      if (t == 0.0) return a == 1.0 ? -1.0 : -std::numeric_limits<double>::infinity();
      return -a * std::pow(t, a - 1.0) * std::exp(-std::pow(t, a));
    };
    g.d2phi_ = [a](double t) {
      if (t == 0.0) return a == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
      const double ta = std::pow(t, a);
      return a * std::pow(t, a - 2.0) * std::exp(-ta) * (a * ta + 1.0 - a);
    };
    g.inv_ = [theta](double u) { return std::pow(-std::log(u), theta); };
    return g;
  }

  /// phi(t) = -log(1 - (1 - e^-theta) e^-t) / theta, theta != 0.
  static ArchimedeanGenerator frank(double theta) {
    if (theta == 0.0 || !std::isfinite(theta))
      throw InvalidCopula("Frank generator needs a finite theta != 0");
    ArchimedeanGenerator g(Family::Frank, theta);
    const double c = -std::expm1(-theta);
    g.phi_ = [theta, c](double t) { return -std::log1p(-c * std::exp(-t)) / theta; };
    g.dphi_ = [theta, c](double t) {
      const double e = c * std::exp(-t);
      return -(e / theta) / (1.0 - e);
    };
    g.d2phi_ = [theta, c](double t) {
      const double e = c * std::exp(-t);
      return (e / theta) / ((1.0 - e) * (1.0 - e));
    };
    g.inv_ = [theta](double u) { return -std::log(std::expm1(-theta * u) / std::expm1(-theta)); };
    return g;
  }

  /// User-supplied generator. The inverse is found by monotone bisection
  /// when not given; missing derivatives fall back to finite differences.
  static ArchimedeanGenerator custom(std::string name, Fn phi, Fn dphi = {}, Fn d2phi = {},
                                     Fn inverse = {}) {
    ArchimedeanGenerator g(Family::Custom, 0.0);
    g.name_ = std::move(name);
    g.phi_ = std::move(phi);
    g.dphi_ = std::move(dphi);
    g.d2phi_ = std::move(d2phi);
    g.inv_ = std::move(inverse);
    return g;
  }

  /// Generator tabulated as (t, phi(t)) pairs, t increasing from 0 and phi
  /// strictly decreasing from 1; monotone cubic (Fritsch-Carlson)
  /// interpolation between knots and an exponential tail beyond the last.
  static ArchimedeanGenerator tabulated(std::vector<std::pair<double, double>> table);

  Family family() const { return family_; }
  double theta() const { return theta_; }
  std::string name() const;
  const std::vector<std::pair<double, double>>& table() const { return table_; }

  double phi(double t) const { return phi_(t); }

  double dphi(double t) const {
    if (dphi_) return dphi_(t);
    const double h = 1e-6 * std::max(1.0, t);
    if (t < h) return (phi_(t + h) - phi_(t)) / h;
    return (phi_(t + h) - phi_(t - h)) / (2.0 * h);
  }

  double d2phi(double t) const {
    if (d2phi_) return d2phi_(t);
    const double h = 1e-4 * std::max(1.0, t);
    if (t < h) return (dphi(t + h) - dphi(t)) / h;
    return (dphi(t + h) - dphi(t - h)) / (2.0 * h);
  }

  /// Pseudo-inverse: 0 at u = 1, +inf at u = 0.
  double inverse(double u) const {
    if (u >= 1.0) return 0.0;
    if (u <= 0.0) return std::numeric_limits<double>::infinity();
    if (inv_) return inv_(u);
    double hi = 1.0;
    while (phi_(hi) > u) {
      hi *= 2.0;
      if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (phi_(mid) > u)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Audit range in t: the preimage of u in [1e-4, 1 - 1e-4].
  std::pair<double, double> audit_range() const { return {inverse(1.0 - 1e-4), inverse(1e-4)}; }

  /// phi(0) = 1, strictly decreasing and midpoint-convex on the audit grid.
  void validate() const {
    if (std::abs(phi(0.0) - 1.0) > 1e-12) throw InvalidCopula(name() + ": phi(0) != 1");
    const auto [lo, hi] = audit_range();
    const double t_hi = std::isfinite(hi) ? hi : 50.0;
    const double step = (t_hi - 0.0) / static_cast<double>(kCertificatePoints - 1);
    double prev = phi(0.0);
    double before = prev;
    for (std::size_t i = 1; i < kCertificatePoints; ++i) {
      const double cur = phi(static_cast<double>(i) * step);
      if (!(cur < prev)) throw InvalidCopula(name() + ": phi is not strictly decreasing");
      if (i >= 2 && prev > 0.5 * (before + cur) + 1e-9)
        throw InvalidCopula(name() + ": phi is not convex");
      before = prev;
      prev = cur;
    }
    (void)lo;
  }

  nlohmann::json to_json() const;

 private:
  ArchimedeanGenerator(Family f, double theta) : family_(f), theta_(theta) {}

  Family family_;
  double theta_;
  std::string name_;
  std::vector<std::pair<double, double>> table_;
  Fn phi_, dphi_, d2phi_, inv_;
};

inline std::string ArchimedeanGenerator::name() const {
  switch (family_) {
    case Family::Independence: return "independence";
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
    case Family::Frank: return "frank";
    case Family::Tabulated: return "tabulated";
    case Family::Custom: return name_.empty() ? "custom" : name_;
  }
  return "unknown";
}

inline nlohmann::json ArchimedeanGenerator::to_json() const {
  nlohmann::json j = {{"type", "archimedean"}, {"family", name()}};
  switch (family_) {
    case Family::Clayton:
    case Family::Gumbel:
    case Family::Frank: j["theta"] = theta_; break;
    case Family::Tabulated: {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& [t, p] : table_) rows.push_back({t, p});
      j["family"] = "tabulated";
      j["table"] = rows;
      break;
    }
    case Family::Custom: throw SpecError("custom generators have no serialized form");
    case Family::Independence: break;
  }
  return j;
}

inline ArchimedeanGenerator ArchimedeanGenerator::tabulated(
    std::vector<std::pair<double, double>> table) {
  const std::size_t m = table.size();
  if (m < 3) throw InvalidCopula("tabulated generator needs at least 3 knots");
  if (table.front().first != 0.0 || std::abs(table.front().second - 1.0) > 1e-12)
    throw InvalidCopula("tabulated generator must start at (0, 1)");
  for (std::size_t i = 1; i < m; ++i) {
    if (!(table[i].first > table[i - 1].first))
      throw InvalidCopula("tabulated generator: t must be strictly increasing");
    if (!(table[i].second < table[i - 1].second) || !(table[i].second > 0.0))
      throw InvalidCopula("tabulated generator: phi must be positive and strictly decreasing");
  }
  std::vector<double> t(m), y(m), slope(m);
  for (std::size_t i = 0; i < m; ++i) std::tie(t[i], y[i]) = table[i];
  std::vector<double> secant(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) secant[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    // Weighted harmonic mean keeps the interpolant monotone.
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
    slope[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
  }
  // Three-point end slopes, kept negative.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    const double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    return d < 0.0 ? d : 0.5 * d0;
  };
  slope[0] = end_slope(t[1] - t[0], t[2] - t[1], secant[0], secant[1]);
  slope[m - 1] = end_slope(t[m - 1] - t[m - 2], t[m - 2] - t[m - 3], secant[m - 2], secant[m - 3]);
  struct Knots {
    std::vector<double> t, y, d;
  };
  auto k = std::make_shared<const Knots>(Knots{t, y, slope});
  const double rate = -slope[m - 1] / y[m - 1];

  auto locate = [k](double x) {
    auto it = std::upper_bound(k->t.begin(), k->t.end(), x);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - k->t.begin()) - 1));
  };
  ArchimedeanGenerator g(Family::Tabulated, 0.0);
  g.table_ = std::move(table);
  g.phi_ = [k, locate, rate](double x) {
    const std::size_t last = k->t.size() - 1;
    if (x >= k->t[last]) return k->y[last] * std::exp(-rate * (x - k->t[last]));
    const std::size_t i = locate(x);
    const double h = k->t[i + 1] - k->t[i];
    const double s = (x - k->t[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * k->y[i] + h10 * h * k->d[i] + h01 * k->y[i + 1] + h11 * h * k->d[i + 1];
  };
  g.dphi_ = [k, locate, rate](double x) {
    const std::size_t last = k->t.size() - 1;
    if (x >= k->t[last]) return -rate * k->y[last] * std::exp(-rate * (x - k->t[last]));
    const std::size_t i = locate(x);
    const double h = k->t[i + 1] - k->t[i];
    const double s = (x - k->t[i]) / h;
    const double dh00 = 6 * s * s - 6 * s, dh10 = 3 * s * s - 4 * s + 1;
    const double dh01 = -6 * s * s + 6 * s, dh11 = 3 * s * s - 2 * s;
    return (dh00 * k->y[i] + dh01 * k->y[i + 1]) / h + dh10 * k->d[i] + dh11 * k->d[i + 1];
  };
  return g;
}

/// Outcome of a grid-certified property.
enum class Certificate { Holds, Fails, Inconclusive };

struct ArchimedeanSiReport {
  Certificate verdict = Certificate::Inconclusive;
  double max_violation = 0.0;  // worst midpoint-convexity defect of log(-phi')
  double at = 0.0;             // t where it occurs
};

/// Stochastic increase of an Archimedean copula holds iff t -> log(-phi'(t))
/// is convex. Certified by three-point convexity on a uniform 1001-point grid
/// over the audit range (plus knot subdivisions for tabulated generators),
/// with slack 1e-9.
inline ArchimedeanSiReport is_si_archimedean(const ArchimedeanGenerator& gen,
                                             double slack = 1e-9) {
  const auto [lo, hi] = gen.audit_range();
  ArchimedeanSiReport r;
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) return r;
  // A generator reaching 0 at finite t0 with phi'(t0-) < 0 has a kink there.
  double t0 = 1.0;
  while (t0 < 1e6 && gen.phi(t0) > 0.0) t0 *= 2.0;
  if (gen.phi(t0) <= 0.0) {
    double a = 0.0;
    while (t0 - a > 1e-12 * t0) {
      const double mid = 0.5 * (a + t0);
      (gen.phi(mid) > 0.0 ? a : t0) = mid;
    }
    if (gen.dphi(a) < -1e-6) return r;
  }
  std::vector<double> ts;
  const double step = (hi - lo) / static_cast<double>(kCertificatePoints - 1);
  for (std::size_t i = 0; i < kCertificatePoints; ++i) ts.push_back(lo + static_cast<double>(i) * step);
  // Tabulated interpolants are only C1: subdivide every knot interval.
  const auto& tab = gen.table();
  for (std::size_t i = 0; i + 1 < tab.size(); ++i)
    for (int s = 0; s <= 8; ++s) {
      const double x = tab[i].first + (tab[i + 1].first - tab[i].first) * s / 8.0;
      if (x > lo && x < hi) ts.push_back(x);
    }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), [](double a, double b) { return b - a < 1e-12; }),
           ts.end());
  std::vector<double> g(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double d = gen.dphi(ts[i]);
    if (!(d < 0.0) || !std::isfinite(d)) return r;  // log(-phi') undefined
    g[i] = std::log(-d);
  }
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double w = (ts[i] - ts[i - 1]) / (ts[i + 1] - ts[i - 1]);
    const double defect = g[i] - ((1.0 - w) * g[i - 1] + w * g[i + 1]);
    if (defect > r.max_violation) {
      r.max_violation = defect;
      r.at = ts[i];
    }
  }
  r.verdict = r.max_violation <= slack ? Certificate::Holds : Certificate::Fails;
  return r;
}

namespace detail {

class ArchimedeanModel final : public CopulaModel {
 public:
  explicit ArchimedeanModel(ArchimedeanGenerator g) : g_(std::move(g)) {}
  Kind kind() const override { return Kind::Archimedean; }

  double eval(double u, double v) const override {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    const double c = g_.phi(g_.inverse(u) + g_.inverse(v));
    return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
  }

  double d1(double u, double v) const override {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    if (u > 0.0 && u < 1.0) {
      const double s = g_.inverse(u);
      const double r = g_.dphi(s + g_.inverse(v)) / g_.dphi(s);
      if (std::isfinite(r)) return std::clamp(r, 0.0, 1.0);
    }
    return CopulaModel::d1(u, v);
  }

  double d2(double u, double v) const override { return d1(v, u); }
  double d2_left(double u, double v) const override { return d1(v, u); }

  nlohmann::json to_json() const override { return g_.to_json(); }
  const ArchimedeanGenerator& generator() const { return g_; }

 private:
  ArchimedeanGenerator g_;
};

}  // namespace detail

/// C(u,v) = phi(phi^[-1](u) + phi^[-1](v)).
inline Copula archimedean_copula(ArchimedeanGenerator gen) {
  gen.validate();
  return Copula(std::make_shared<detail::ArchimedeanModel>(std::move(gen)));
}

/// Convex A on [0,1] with max(t, 1-t) <= A(t) <= 1.
class PickandsFunction {
 public:
  enum class Family { Independence, Comonotone, Gumbel, Tabulated };

  static PickandsFunction independence() {
    return PickandsFunction(Family::Independence, 0.0, [](double) { return 1.0; });
  }
  static PickandsFunction comonotone() {
    return PickandsFunction(Family::Comonotone, 0.0,
                            [](double t) { return std::max(t, 1.0 - t); });
  }
  /// A(t) = (t^theta + (1-t)^theta)^(1/theta), theta >= 1.
  static PickandsFunction gumbel(double theta) {
    if (!(theta >= 1.0) || !std::isfinite(theta))
      throw InvalidCopula("Gumbel Pickands function needs theta >= 1");
    return PickandsFunction(Family::Gumbel, theta, [theta](double t) {
      return std::pow(std::pow(t, theta) + std::pow(1.0 - t, theta), 1.0 / theta);
    });
  }
  /// Values on the uniform grid t_i = i/(m-1), linearly interpolated.
  static PickandsFunction tabulated(std::vector<double> values) {
    if (values.size() < 2) throw InvalidCopula("tabulated Pickands function needs 2+ values");
    auto vals = std::make_shared<const std::vector<double>>(values);
    PickandsFunction p(Family::Tabulated, 0.0, [vals](double t) {
      const std::size_t m = vals->size() - 1;
      const double s = std::clamp(t, 0.0, 1.0) * static_cast<double>(m);
      const std::size_t i = std::min(static_cast<std::size_t>(s), m - 1);
      const double f = s - static_cast<double>(i);
      return (1.0 - f) * (*vals)[i] + f * (*vals)[i + 1];
    });
    p.values_ = std::move(values);
    return p;
  }

  double operator()(double t) const { return a_(t); }
  Family family() const { return family_; }
  double theta() const { return theta_; }

  /// Bounds and midpoint convexity on a 1001-point grid within 1e-12.
  void validate(double tol = 1e-12) const {
    std::vector<double> a(kCertificatePoints);
    const double step = 1.0 / static_cast<double>(kCertificatePoints - 1);
    for (std::size_t i = 0; i < kCertificatePoints; ++i) {
      const double t = static_cast<double>(i) * step;
      a[i] = a_(t);
      if (a[i] < std::max(t, 1.0 - t) - tol || a[i] > 1.0 + tol) {
        std::ostringstream os;
        os << "Pickands function violates max(t,1-t) <= A(t) <= 1 at t = " << t;
        throw InvalidCopula(os.str());
      }
    }
    for (std::size_t i = 1; i + 1 < kCertificatePoints; ++i) {
      if (a[i] > 0.5 * (a[i - 1] + a[i + 1]) + tol)
        throw InvalidCopula("Pickands function is not convex");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"type", "extreme-value"}};
    switch (family_) {
      case Family::Independence: j["pickands"] = "independence"; break;
      case Family::Comonotone: j["pickands"] = "comonotone"; break;
      case Family::Gumbel:
        j["pickands"] = "gumbel";
        j["theta"] = theta_;
        break;
      case Family::Tabulated:
        j["pickands"] = "tabulated";
        j["values"] = values_;
        break;
    }
    return j;
  }

 private:
  PickandsFunction(Family f, double theta, std::function<double(double)> a)
      : family_(f), theta_(theta), a_(std::move(a)) {}

  Family family_;
  double theta_;
  std::function<double(double)> a_;
  std::vector<double> values_;
};

namespace detail {

class ExtremeValueModel final : public CopulaModel {
 public:
  explicit ExtremeValueModel(PickandsFunction a) : a_(std::move(a)) {}
  Kind kind() const override { return Kind::ExtremeValue; }

  double eval(double u, double v) const override {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    // The formula is 0/0 on the upper margins; use the margin limits.
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    const double lu = std::log(u);
    const double luv = lu + std::log(v);
    const double c = std::exp(luv * a_(lu / luv));
    return std::clamp(c, std::max(u + v - 1.0, 0.0), std::min(u, v));
  }

  nlohmann::json to_json() const override { return a_.to_json(); }
  const PickandsFunction& pickands() const { return a_; }

 private:
  PickandsFunction a_;
};

}  // namespace detail

/// C(u,v) = exp(log(uv) A(log u / log uv)).
inline Copula extreme_value_copula(PickandsFunction a) {
  a.validate();
  return Copula(std::make_shared<detail::ExtremeValueModel>(std::move(a)));
}

}  // namespace copula
