#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "copula/all.hpp"

using namespace copula;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridCopula a_matrix() {
  return GridCopula::from_rows(
      {{2.0 / 3, 0.0, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.0, 2.0 / 3, 1.0 / 3}});
}

double max_abs(const SquareMatrix& a, const SquareMatrix& b) { return a.max_abs_diff(b); }

// 1
void sections_of_a() {
  const auto t0 = std::chrono::steady_clock::now();
  const Copula a(a_matrix());
  const auto v1 = check_si(a, 1, 0.0);
  const auto v2 = check_si(a, 2, 0.0);
  bool ok = v1.si && v1.max_violation == 0.0 && !v2.si && v2.max_violation > 0.0 && v2.x1 < v2.x2;
  const double third = 1.0 / 3;
  const double d1_expected[3] = {2.0 / 3, 1.0 / 3, 0.0};
  const double d2_expected[3] = {2.0 / 3, 0.0, 1.0 / 3};
  for (int k = 0; k < 3; ++k) {
    const double x = (k + 0.5) / 3.0;
    ok = ok && partial_derivative(a, 1, x, third) == d1_expected[k];
    ok = ok && partial_derivative(a, 2, third, x) == d2_expected[k];
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "si1=%d si2=%d witness=(%.6g, %.6g, y=%.6g) %.3fs", v1.si, v2.si,
                v2.x1, v2.x2, v2.y, secs);
  report(1, "checkerboard example sections", ok, buf);
}

// 2
void identities() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (std::size_t n : {2u, 3u, 8u, 16u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const GridCopula c = random_doubly_stochastic(n, rng);
      worst = std::max(worst, max_abs(markov_product(GridCopula::upper(n), c).matrix(), c.matrix()));
      worst = std::max(worst, max_abs(markov_product(c, GridCopula::upper(n)).matrix(), c.matrix()));
      worst = std::max(worst, max_abs(markov_product(GridCopula::product(n), c).matrix(),
                                      GridCopula::product(n).matrix()));
      worst = std::max(worst, max_abs(markov_product(c, GridCopula::product(n)).matrix(),
                                      GridCopula::product(n).matrix()));
    }
    worst = std::max(worst, max_abs(markov_product(GridCopula::lower(n), GridCopula::lower(n)).matrix(),
                                    GridCopula::upper(n).matrix()));
  }
  const double secs = seconds_since(t0);
  report(2, "identity, annihilator, lower bound squared", worst <= 1e-12 && secs < 1.0,
         fmt("max error %.3g", worst) + fmt(" %.3fs", secs));
}

// 3
void quadrature_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  double worst = 0.0;
  int pairs = 0;
  for (std::size_t n : {2u, 3u, 4u, 8u, 16u}) {
    for (int trial = 0; trial < 20; ++trial, ++pairs) {
      const GridCopula x = random_doubly_stochastic(n, rng);
      const GridCopula y = random_doubly_stochastic(n, rng);
      const GridCopula p = markov_product(x, y);
      const auto q = quadrature_markov_product(Copula(x), Copula(y), 8 * n);
      for (std::size_t k = 0; k <= n; ++k)
        for (std::size_t l = 0; l <= n; ++l) {
          const double u = static_cast<double>(k) / n, v = static_cast<double>(l) / n;
          worst = std::max(worst, std::abs(p.corner(k, l) - q(u, v)));
        }
    }
  }
  const double secs = seconds_since(t0);
  report(3, "matrix product vs midpoint quadrature", worst <= 1e-9 && secs < 30.0,
         std::to_string(pairs) + " pairs" + fmt(", max error %.3g", worst) + fmt(" %.3fs", secs));
}

// 4
void involution() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  bool exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const GridCopula g = random_doubly_stochastic(n, rng);
    const Copula once = markov_product(Copula::lower(), Copula(g));
    for (std::size_t i = 1; i < 4 * n; ++i) {
      if (i % 4 == 0) continue;  // cell boundaries in u
      for (std::size_t j = 1; j < 4 * n; ++j) {
        const double u = i / (4.0 * n), v = j / (4.0 * n);
        worst = std::max(worst, std::abs(once.d1(u, v) - g.d1(1.0 - u, v)));
      }
    }
    const Copula twice = si_sd_involution(si_sd_involution(Copula(g)));
    exact = exact && *twice.grid() == g;
  }
  report(4, "reflection of the first partial derivative", worst <= 1e-12 && exact,
         fmt("max error %.3g", worst) + (exact ? ", involution exact" : ", involution NOT exact"));
}

std::vector<Copula> si_set() {
  return {Copula::product(), Copula::upper(), Copula(a_matrix()),
          Copula(discretize(archimedean_copula(ArchimedeanGenerator::gumbel(1.5)), 64)),
          Copula(discretize(archimedean_copula(ArchimedeanGenerator::gumbel(3.0)), 64))};
}

std::size_t d_size(const Copula& c) { return c.grid() ? c.grid()->n() : 8; }

// 5
void dominance() {
  std::mt19937_64 rng(109);
  double fwd = 0.0, rev = 0.0;
  const auto si = si_set();
  for (const auto& c : si)
    for (int t = 0; t < 100; ++t) {
      const Copula d(random_doubly_stochastic(d_size(c), rng));
      fwd = std::max(fwd, check_dominance(d, c, 1e-9).max_violation);
    }
  std::vector<Copula> sd = {Copula::lower()};
  for (const auto& c : si) sd.push_back(si_sd_involution(c));
  for (const auto& c : sd)
    for (int t = 0; t < 100; ++t) {
      const Copula d(random_doubly_stochastic(d_size(c), rng));
      rev = std::max(rev, check_dominance(d, c, 1e-9, true).max_violation);
    }
  report(5, "dominance under left products", fwd <= 1e-9 && rev <= 1e-9,
         fmt("SI max excess %.3g", fwd) + fmt(", SD max excess %.3g", rev));
}

// 6
void closure_table() {
  std::vector<GridCopula> si = {
      GridCopula::upper(6), GridCopula::product(6), a_matrix().refined(2),
      discretize(archimedean_copula(ArchimedeanGenerator::clayton(2.0)), 6),
      discretize(extreme_value_copula(PickandsFunction::gumbel(2.0)), 6)};
  std::vector<GridCopula> sd;
  for (const auto& g : si) sd.push_back(*si_sd_involution(Copula(g)).grid());
  bool inputs = true;
  for (const auto& g : si) inputs = inputs && check_si(Copula(g), 1, 0.0).si;
  for (const auto& g : sd) inputs = inputs && check_sd(Copula(g), 1, 0.0).sd;
  std::vector<std::pair<GridCopula, bool>> all;  // (copula, is SI)
  for (const auto& g : si) all.emplace_back(g, true);
  for (const auto& g : sd) all.emplace_back(g, false);
  int checked = 0, matched = 0;
  for (const auto& [a, a_si] : all)
    for (const auto& [b, b_si] : all) {
      const Copula p(markov_product(a, b));
      const bool want_si = a_si == b_si;
      const auto v = want_si ? check_si(p, 1, 1e-12) : check_sd(p, 1, 1e-12);
      ++checked;
      if (v.exact && (want_si ? v.si : v.sd)) ++matched;
    }
  report(6, "SI/SD sign table of products", inputs && checked == 100 && matched == 100,
         std::to_string(matched) + "/" + std::to_string(checked) + " verdicts match");
}

// 7
void iterates_of_a() {
  std::size_t reached = 0;
  for (std::size_t n = 1; n <= 100 && reached == 0; ++n) {
    const GridCopula p = power(a_matrix(), n);
    double gap = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) gap = std::max(gap, std::abs(p(i, j) - 1.0 / 3));
    if (gap <= 1e-8) reached = n;
  }
  const auto r = iterate_to_limit(Copula(a_matrix()), 1e-8, 200);
  const bool ok = reached > 0 && r.converged &&
                  r.intervals.approx_equal(IntervalFamily({{0.0, 1.0}}), 1e-9) &&
                  r.monotone_decrease_violation <= 1e-12;
  report(7, "powers of the checkerboard example", ok,
         "entries within 1e-8 of 1/3 at n=" + std::to_string(reached) + ", limit blocks " +
             std::to_string(r.intervals.size()) + fmt(", increase %.3g", r.monotone_decrease_violation));
}

// 8
void ordinal_round_trip() {
  const std::vector<IntervalFamily> families = {
      IntervalFamily({{0.0, 1.0 / 3}, {5.0 / 6, 1.0}}),
      IntervalFamily({{1.0 / 3, 1.0}}),
      IntervalFamily({{0, 1.0 / 6}, {1.0 / 6, 2.0 / 6}, {2.0 / 6, 3.0 / 6}, {3.0 / 6, 4.0 / 6},
                      {4.0 / 6, 5.0 / 6}, {5.0 / 6, 1.0}})};
  bool ok = true;
  double gap = 0.0, endpoint = 0.0;
  for (const auto& f : families) {
    const Copula c = ordinal_sum(f, std::vector<Copula>(f.size(), Copula::product()));
    const auto idem = is_idempotent(c, 1e-9, AlgebraConfig{36, 4096});
    gap = std::max(gap, idem.gap);
    const auto dec = extract_pi_ordinal_structure(c);
    ok = ok && idem.idempotent && dec.verified && dec.intervals.size() == f.size();
    if (dec.intervals.size() == f.size())
      for (std::size_t k = 0; k < f.size(); ++k)
        endpoint = std::max({endpoint, std::abs(dec.intervals[k].lo - f[k].lo),
                             std::abs(dec.intervals[k].hi - f[k].hi)});
  }
  ok = ok && gap <= 1e-9 && endpoint <= 1e-12;
  report(8, "ordinal sums of the product round-trip", ok,
         fmt("idempotency gap %.3g at n=36", gap) + fmt(", endpoint error %.3g", endpoint));
}

// 9
void idempotent_sweep() {
  std::vector<GridCopula> suite;
  for (const auto& f : {IntervalFamily(), IntervalFamily({{0.0, 1.0}}),
                        IntervalFamily({{0.0, 1.0 / 3}, {5.0 / 6, 1.0}}), IntervalFamily({{1.0 / 3, 1.0}}),
                        IntervalFamily({{0.0, 0.5}, {0.5, 1.0}}), IntervalFamily({{0.25, 0.5}})})
    suite.push_back(copula_of(conditional_expectation_form(f, 12)));
  suite.push_back(copula_of(averaging_operator({{0, 2}, {1, 3}}, 4)));
  suite.push_back(copula_of(averaging_operator({{0, 3}}, 4)));
  suite.push_back(copula_of(averaging_operator({{0, 5}, {1, 2, 3, 4}}, 6)));
  bool ok = true;
  int sd = 0, nqd = 0;
  double dist = 0.0;
  for (const auto& g : suite) {
    const Copula c(g);
    ok = ok && is_idempotent(c, 1e-12).idempotent;
    const bool is_sd = check_sd(c, 1, 1e-12).sd;
    const auto q = check_quadrant_dependence(c, 1e-12).kind;
    const bool is_nqd = q == QuadrantDependence::NQD || q == QuadrantDependence::Both;
    if (is_sd || is_nqd) {
      const double d = d_inf(c, Copula::product());
      dist = std::max(dist, d);
      ok = ok && d <= 1e-9;
    }
    sd += is_sd;
    nqd += is_nqd;
  }
  const double sob = sobolev_diagonal(Copula::product());
  ok = ok && sd == 1 && nqd == 1 && std::abs(sob - 2.0 / 3.0) <= 1e-9;
  report(9, "SD and NQD idempotents", ok,
         "SD members " + std::to_string(sd) + ", NQD members " + std::to_string(nqd) +
             fmt(", d_inf to product %.3g", dist) + fmt(", diagonal functional %.12g", sob));
}

// 10
void isomorphism() {
  std::mt19937_64 rng(113);
  double worst = 0.0;
  bool exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const GridCopula x = random_doubly_stochastic(n, rng);
    const GridCopula y = random_doubly_stochastic(n, rng);
    const auto lhs = operator_of(Copula(markov_product(x, y)), n);
    const auto rhs = operator_of(Copula(x), n) * operator_of(Copula(y), n);
    worst = std::max(worst, max_abs(lhs.matrix(), rhs.matrix()));
    exact = exact && copula_of(operator_of(Copula(x), n)) == x;
  }
  report(10, "copulas and operators compose alike", worst <= 1e-12 && exact,
         fmt("max error %.3g", worst) + (exact ? ", round trip exact" : ", round trip NOT exact"));
}

// 11
void conditional_expectations() {
  const std::size_t n = 12;
  const std::vector<IntervalFamily> families = {
      IntervalFamily(), IntervalFamily({{0.0, 1.0}}), IntervalFamily({{0.0, 1.0 / 3}, {5.0 / 6, 1.0}}),
      IntervalFamily({{1.0 / 3, 1.0}}), IntervalFamily({{0.25, 0.75}}),
      IntervalFamily({{0.0, 0.5}, {0.5, 1.0}}), IntervalFamily({{1.0 / 12, 0.25}, {0.5, 2.0 / 3}})};
  std::mt19937_64 rng(127);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double idem = 0.0, match = 0.0, upward = 0.0;
  for (const auto& f : families) {
    const auto op = conditional_expectation_form(f, n);
    idem = std::max(idem, max_abs(op.matrix() * op.matrix(), op.matrix()));
    match = std::max(match, max_abs(copula_of(op).matrix(),
                                    discretize(ordinal_sum_of_product(f), n).matrix()));
    for (int t = 0; t < 20; ++t) {
      std::vector<double> v(n);
      for (double& x : v) x = unif(rng);
      std::sort(v.rbegin(), v.rend());
      upward = std::max(upward, op.apply(StepFunction(v)).increase_violation());
    }
  }
  // Monotonicity-preserving idempotents among a mixed suite.
  std::vector<DiscreteMarkovOperator> suite;
  for (const auto& f : families) suite.push_back(conditional_expectation_form(f, n));
  suite.push_back(averaging_operator({{0, 2}}, 4));
  suite.push_back(averaging_operator({{0, 3}, {1, 2}}, 4));
  suite.push_back(averaging_operator({{1, 4, 5}}, 6));
  int preserving = 0, rebuilt = 0;
  for (const auto& op : suite) {
    const std::size_t m = op.n();
    bool preserves = true;
    for (std::size_t cells = 0; cells <= m; ++cells)
      preserves = preserves &&
                  operator_preserves_monotone(Copula(copula_of(op)), StepFunction::lower_indicator(m, cells))
                      .preserves;
    if (!preserves) continue;
    ++preserving;
    const auto blocks = fixed_sigma_field(op, 1e-12).intervals(m);
    if (blocks && max_abs(conditional_expectation_form(*blocks, m).matrix(), op.matrix()) <= 1e-12) ++rebuilt;
  }
  const bool ok = idem <= 1e-12 && match <= 1e-12 && upward <= 1e-12 && preserving == rebuilt &&
                  preserving == static_cast<int>(families.size());
  report(11, "monotone conditional expectations", ok,
         fmt("|A^2-A| %.3g", idem) + fmt(", copula vs ordinal sum %.3g", match) +
             fmt(", upward step %.3g", upward) + ", rebuilt " + std::to_string(rebuilt) + "/" +
             std::to_string(preserving));
}

// 12
void convergence_modes() {
  const GridCopula a = a_matrix();
  std::size_t cross_inf = 0, cross_d1 = 0, cross_der = 0;
  GridCopula cur = a;
  for (std::size_t k = 1; k <= 100 && (!cross_inf || !cross_d1 || !cross_der); ++k) {
    const GridCopula next = markov_product(cur, a);
    const Copula x(cur), y(next);
    if (!cross_inf && d_inf(x, y) < 1e-8) cross_inf = k;
    if (!cross_d1 && d1_metric(x, y) < 1e-8) cross_d1 = k;
    if (!cross_der && max_derivative_gap(x, y) < 1e-8) cross_der = k;
    cur = next;
  }
  const auto lo = std::min({cross_inf, cross_d1, cross_der});
  const auto hi = std::max({cross_inf, cross_d1, cross_der});
  const bool ok = lo > 0 && hi <= 2 * lo;
  report(12, "uniform, D1 and derivative convergence", ok,
         "crossing steps d_inf=" + std::to_string(cross_inf) + " D1=" + std::to_string(cross_d1) +
             " derivative=" + std::to_string(cross_der));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      sections_of_a, identities,       quadrature_oracle, involution,
      dominance,     closure_table,    iterates_of_a,     ordinal_round_trip,
      idempotent_sweep, isomorphism,   conditional_expectations, convergence_modes};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
