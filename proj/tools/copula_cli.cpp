// copula_cli: command-line front end for the copula library.
//
// Exit codes: 0 success / property holds, 1 property fails, 2 input error,
// 3 no convergence.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

#include "CLI11.hpp"
#include "copula/all.hpp"

namespace {

using namespace copula;
namespace fs = std::filesystem;

constexpr int kHolds = 0;
constexpr int kFails = 1;
constexpr int kInputError = 2;
constexpr int kNoConvergence = 3;

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::size_t grid_cap() {
  const char* env = std::getenv("COPULA_GRID_CAP");
  if (!env || !*env) return AlgebraConfig{}.cap;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(env).size() || v == 0)
    throw SpecError(std::string("COPULA_GRID_CAP must be a positive integer, got \"") + env + "\"");
  return static_cast<std::size_t>(v);
}

struct Common {
  std::size_t resolution = AlgebraConfig{}.resolution;
  AlgebraConfig config() const { return {resolution, grid_cap()}; }
};

// check ------------------------------------------------------------------

struct CheckArgs {
  std::string spec;
  std::string property;
  double tol = 1e-9;
};

int run_check(const CheckArgs& a, const Common& common) {
  const Copula c = load_copula(a.spec);
  const AlgebraConfig cfg = common.config();
  json out = {{"property", a.property}};
  bool holds = false;
  if (a.property == "si1" || a.property == "si2" || a.property == "sd1" || a.property == "sd2") {
    const int component = a.property.back() - '0';
    const bool si = a.property[1] == 'i';
    const auto v = si ? check_si(c, component, a.tol) : check_sd(c, component, a.tol);
    holds = si ? v.si : v.sd;
    out.update(to_json(v));
    out["exact"] = v.exact;
  } else if (a.property == "idempotent") {
    const auto r = is_idempotent(c, a.tol, cfg);
    holds = r.idempotent;
    out["gap"] = r.gap;
    out["witness"] = {r.u, r.v};
  } else if (a.property == "pqd" || a.property == "nqd") {
    const auto q = check_quadrant_dependence(c, a.tol);
    const bool both = q.kind == QuadrantDependence::Both;
    holds = both || (a.property == "pqd" ? q.kind == QuadrantDependence::PQD
                                         : q.kind == QuadrantDependence::NQD);
    out["kind"] = to_string(q.kind);
    out["max_above_product"] = q.max_above_product;
    out["max_below_product"] = q.max_below_product;
  } else if (a.property == "complete-dependence") {
    const auto r = check_complete_dependence(c, a.tol, cfg);
    holds = r.holds;
    out["gap"] = r.gap;
  }
  out["holds"] = holds;
  emit(out);
  return holds ? kHolds : kFails;
}

// product ----------------------------------------------------------------

struct ProductArgs {
  std::string a, b, out;
  bool oracle = false;
  std::size_t panels = 0;
};

int run_product(const ProductArgs& p, const Common& common) {
  const Copula a = load_copula(p.a);
  const Copula b = load_copula(p.b);
  const Copula r = markov_product(a, b, common.config());
  save_copula(p.out, r);
  json out = {{"out", p.out}, {"type", copula_to_json(r)["type"]}};
  if (const GridCopula* g = r.grid()) out["resolution"] = g->n();
  if (p.oracle) {
    std::vector<double> axis;
    std::size_t m = p.panels;
    if (const GridCopula* g = r.grid()) {
      for (std::size_t k = 0; k <= g->n(); ++k)
        axis.push_back(static_cast<double>(k) / static_cast<double>(g->n()));
      if (m == 0) m = g->n() * ((256 + g->n() - 1) / g->n());
    } else {
      for (std::size_t k = 0; k <= 16; ++k) axis.push_back(static_cast<double>(k) / 16.0);
      if (m == 0) m = 1024;
    }
    const auto q = quadrature_markov_product(a, b, m);
    double worst = 0.0;
    for (double u : axis)
      for (double v : axis) worst = std::max(worst, std::abs(q(u, v) - r.eval(u, v)));
    out["oracle"] = {{"panels", m}, {"points", axis.size() * axis.size()}, {"max_discrepancy", worst}};
  }
  emit(out);
  return kHolds;
}

// iterate ----------------------------------------------------------------

struct IterateArgs {
  std::string spec, out_dir;
  double tol = 1e-8;
  std::size_t max_iter = 200;
  double decomposition_tol = 1e-6;
};

int run_iterate(const IterateArgs& a, const Common& common) {
  const Copula c = load_copula(a.spec);
  IterateReport rep;
  try {
    rep = iterate_to_limit(c, a.tol, a.max_iter, common.config(), a.decomposition_tol);
  } catch (const NotStochasticallyIncreasing& e) {
    const GridCopula g = c.grid() ? *c.grid() : as_grid(c, common.resolution);
    json out = {{"error", e.what()}, {"verdict", to_json(check_si(Copula(g), 1, 1e-12))}};
    emit(out);
    return kFails;
  }
  fs::create_directories(a.out_dir);
  json report = to_json(rep);
  {
    std::ofstream f(fs::path(a.out_dir) / "report.json");
    f << report.dump(2) << '\n';
  }
  {
    std::ofstream f(fs::path(a.out_dir) / "steps.csv");
    f << "step,d_inf_gap,d1_gap\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : rep.history) f << s.step << ',' << s.d_inf_gap << ',' << s.d1_gap << '\n';
  }
  report.erase("limit");
  emit(report);
  if (!rep.converged) {
    std::cerr << "no convergence after " << rep.n_steps << " steps; final gap " << rep.sup_gap << '\n';
    return kNoConvergence;
  }
  return kHolds;
}

// derivative-trace --------------------------------------------------------

struct TraceArgs {
  std::string spec, out;
  int component = 1;
  double at = 0.5;
  std::size_t points = 300;
};

int run_trace(const TraceArgs& a, const Common&) {
  const Copula c = load_copula(a.spec);
  if (a.at < 0.0 || a.at > 1.0) throw DomainError("--at must lie in [0,1]");
  std::ofstream f(a.out);
  if (!f) throw SpecError("cannot write " + a.out);
  f << (a.component == 1 ? "u,d1" : "v,d2") << '\n'
    << std::setprecision(std::numeric_limits<double>::max_digits10);
  // Component 1: u -> d1 C(u, at). Component 2: v -> d2 C(at, v).
  for (std::size_t i = 0; i < a.points; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(a.points);
    const double d = a.component == 1 ? c.d1(x, a.at) : c.d2(a.at, x);
    f << x << ',' << d << '\n';
  }
  emit({{"out", a.out}, {"component", a.component}, {"at", a.at}, {"points", a.points}});
  return kHolds;
}

// decompose --------------------------------------------------------------

struct DecomposeArgs {
  std::string spec;
  double tol = 1e-6;
};

int run_decompose(const DecomposeArgs& a, const Common& common) {
  const Copula c = load_copula(a.spec);
  const AlgebraConfig cfg = common.config();
  const auto rep = extract_pi_ordinal_structure(c, a.tol);
  json out = to_json(rep);
  const auto idem = certify_idempotent(c, a.tol, cfg);
  out["idempotency"] = {{"gap", idem.gap}, {"resolution", idem.resolution}};
  out["idempotent"] = idem.idempotent;
  emit(out);
  return idem.idempotent && rep.verified ? kHolds : kFails;
}

// metric -----------------------------------------------------------------

struct MetricArgs {
  std::string a, b, metric = "dinf";
};

int run_metric(const MetricArgs& m, const Common& common) {
  const Copula a = load_copula(m.a);
  const AlgebraConfig cfg = common.config();
  json out = {{"metric", m.metric}, {"copula_a", m.a}};
  if (m.metric == "sobolev-diag") {
    out["value"] = sobolev_diagonal(a, cfg);
    out["n_nodes"] = kSimpsonNodes;
    out["copula_b"] = nullptr;
  } else {
    if (m.b.empty()) throw SpecError("metric " + m.metric + " needs two specs");
    const Copula b = load_copula(m.b);
    out["copula_b"] = m.b;
    const GridCopula* ga = a.grid();
    const GridCopula* gb = b.grid();
    if (m.metric == "dinf") {
      out["value"] = d_inf(a, b);
      if (ga && gb && ga->n() == gb->n())
        out["n_nodes"] = (ga->n() + 1) * (ga->n() + 1);
      else {
        const auto axis = audit_axis({&a, &b});
        out["n_nodes"] = axis.size() * axis.size();
      }
    } else {
      out["value"] = d1_metric(a, b, cfg);
      if (ga && gb)
        out["n_nodes"] = detail::common_resolution(ga->n(), gb->n(), cfg.cap) *
                         detail::common_resolution(ga->n(), gb->n(), cfg.cap);
      else
        out["n_nodes"] = kMidpointPanels * 2 * kMidpointPanels;
    }
  }
  emit(out);
  return kHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate copulas under the Markov product"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Common common;
  app.add_option("--resolution", common.resolution,
                 "Grid resolution used to discretize analytic copulas in products "
                 "(COPULA_GRID_CAP caps refined resolutions, default 4096)")
      ->check(CLI::PositiveNumber);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Test a property; exit 0 if it holds, 1 if not");
  c->add_option("spec", check.spec, "Copula spec (JSON, or matrix CSV)")->required();
  c->add_option("--property", check.property, "Property to test")
      ->required()
      ->check(CLI::IsMember(
          {"si1", "si2", "sd1", "sd2", "idempotent", "pqd", "nqd", "complete-dependence"}));
  c->add_option("--tol", check.tol, "Tolerance")->check(CLI::NonNegativeNumber);

  ProductArgs product;
  auto* p = app.add_subcommand("product", "Markov product A * B, written as a spec");
  p->add_option("spec-a", product.a)->required();
  p->add_option("spec-b", product.b)->required();
  p->add_option("out", product.out, "Output spec path")->required();
  p->add_flag("--oracle", product.oracle, "Cross-check against midpoint quadrature");
  p->add_option("--panels", product.panels,
                "Quadrature panels for --oracle (0: a multiple of the resolution >= 256)");

  IterateArgs iterate;
  auto* it = app.add_subcommand("iterate", "Iterate C, C*C, ... to its idempotent limit");
  it->add_option("spec", iterate.spec)->required();
  it->add_option("out-dir", iterate.out_dir, "Directory for report.json and steps.csv")->required();
  it->add_option("--tol", iterate.tol, "Stop when d_inf between iterates drops below this")
      ->check(CLI::PositiveNumber);
  it->add_option("--max-iter", iterate.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  it->add_option("--decomposition-tol", iterate.decomposition_tol,
                 "Diagonal fixed-point tolerance for the limit's blocks")
      ->check(CLI::PositiveNumber);

  TraceArgs trace;
  auto* tr = app.add_subcommand("derivative-trace",
                                "CSV of u -> d1 C(u, at) (component 1) or v -> d2 C(at, v) (component 2)");
  tr->add_option("spec", trace.spec)->required();
  tr->add_option("out", trace.out, "Output CSV")->required();
  tr->add_option("--component", trace.component)->check(CLI::IsMember({1, 2}));
  tr->add_option("--at", trace.at, "Value of the fixed argument")->check(CLI::Range(0.0, 1.0));
  tr->add_option("--points", trace.points, "Number of rows, at cell midpoints (i + 1/2)/m")
      ->check(CLI::PositiveNumber);

  DecomposeArgs decompose;
  auto* de = app.add_subcommand("decompose", "Interval family of an idempotent copula");
  de->add_option("spec", decompose.spec)->required();
  de->add_option("--tol", decompose.tol, "Diagonal fixed-point tolerance")->check(CLI::PositiveNumber);

  MetricArgs metric;
  auto* me = app.add_subcommand("metric", "Distance between two copulas, or the Sobolev diagonal of one");
  me->add_option("spec-a", metric.a)->required();
  me->add_option("spec-b", metric.b, "Second spec (not used by sobolev-diag)");
  me->add_option("--metric", metric.metric)->check(CLI::IsMember({"dinf", "d1", "sobolev-diag"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*c) return run_check(check, common);
    if (*p) return run_product(product, common);
    if (*it) return run_iterate(iterate, common);
    if (*tr) return run_trace(trace, common);
    if (*de) return run_decompose(decompose, common);
    if (*me) return run_metric(metric, common);
  } catch (const NotIdempotent& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFails;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
