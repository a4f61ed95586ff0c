#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "families.hpp"
#include "iterate.hpp"
#include "json.hpp"
#include "monotonicity.hpp"
#include "operators.hpp"

namespace copula {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SpecError(std::string("copula spec is missing field \"") + key + "\"");
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const json& x = field(j, key);
  if (!x.is_number()) throw SpecError(std::string("field \"") + key + "\" must be a number");
  return x.get<double>();
}

}  // namespace detail

/// (t, phi(t)) pairs, one per line.
inline std::vector<std::pair<double, double>> read_generator_csv(std::istream& in) {
  std::vector<std::pair<double, double>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double t = 0.0, p = 0.0;
    char comma = 0;
    std::stringstream ss(line);
    if (!(ss >> t >> comma >> p) || comma != ',')
      throw SpecError("generator CSV: expected \"t,phi\" in line \"" + line + "\"");
    table.emplace_back(t, p);
  }
  return table;
}

/// Builds a copula from its JSON description. A tabulated generator may
/// name a CSV file ("table_file") instead of listing "table"; relative paths
/// are resolved against base_dir.
inline Copula copula_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  const json& type_field = detail::field(j, "type");
  if (!type_field.is_string()) throw SpecError("field \"type\" must be a string");
  const std::string type = type_field.get<std::string>();
  try {
    if (type == "checkerboard") {
      const json& m = detail::field(j, "matrix");
      if (!m.is_array() || m.empty()) throw SpecError("\"matrix\" must be a nonempty array of rows");
      const auto rows = m.get<std::vector<std::vector<double>>>();
      SquareMatrix a;
      try {
        a = SquareMatrix::from_rows(rows);
      } catch (const DomainError& e) {
        throw SpecError(std::string("\"matrix\": ") + e.what());
      }
      return Copula(GridCopula(std::move(a)));
    }
    if (type == "product") return Copula::product();
    if (type == "frechet-upper") return Copula::upper();
    if (type == "frechet-lower") return Copula::lower();
    if (type == "archimedean") {
      const std::string fam = detail::field(j, "family").get<std::string>();
      if (fam == "independence") return archimedean_copula(ArchimedeanGenerator::independence());
      if (fam == "clayton")
        return archimedean_copula(ArchimedeanGenerator::clayton(detail::number(j, "theta")));
      if (fam == "gumbel")
        return archimedean_copula(ArchimedeanGenerator::gumbel(detail::number(j, "theta")));
      if (fam == "frank")
        return archimedean_copula(ArchimedeanGenerator::frank(detail::number(j, "theta")));
      if (fam == "tabulated") {
        std::vector<std::pair<double, double>> table;
        if (j.contains("table_file")) {
          const std::filesystem::path file = base_dir / detail::field(j, "table_file").get<std::string>();
          std::ifstream in(file);
          if (!in) throw SpecError("cannot open " + file.string());
          table = read_generator_csv(in);
        } else {
          table = detail::field(j, "table").get<std::vector<std::pair<double, double>>>();
        }
        return archimedean_copula(ArchimedeanGenerator::tabulated(std::move(table)));
      }
      throw SpecError("unknown Archimedean family \"" + fam + "\"");
    }
    if (type == "extreme-value") {
      const std::string p = detail::field(j, "pickands").get<std::string>();
      if (p == "independence") return extreme_value_copula(PickandsFunction::independence());
      if (p == "comonotone") return extreme_value_copula(PickandsFunction::comonotone());
      if (p == "gumbel")
        return extreme_value_copula(PickandsFunction::gumbel(detail::number(j, "theta")));
      if (p == "tabulated")
        return extreme_value_copula(
            PickandsFunction::tabulated(detail::field(j, "values").get<std::vector<double>>()));
      throw SpecError("unknown Pickands function \"" + p + "\"");
    }
    if (type == "ordinal-sum") {
      std::vector<Interval> ivs;
      for (const auto& pair : detail::field(j, "intervals")) {
        if (!pair.is_array() || pair.size() != 2) throw SpecError("intervals must be [a, b] pairs");
        ivs.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      std::vector<Copula> comps;
      for (const auto& c : detail::field(j, "components")) comps.push_back(copula_from_json(c, base_dir));
      return ordinal_sum(IntervalFamily(std::move(ivs)), std::move(comps));
    }
    if (type == "transpose") return transpose(copula_from_json(detail::field(j, "of"), base_dir));
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed ") + type + " spec: " + e.what());
  }
  throw SpecError("unknown copula type \"" + type + "\"");
}

inline json copula_to_json(const Copula& c) { return c.to_json(); }

/// Headerless CSV, one matrix row per line.
inline SquareMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw SpecError("matrix CSV: cannot parse \"" + cell + "\"");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SpecError("matrix CSV is empty");
  try {
    return SquareMatrix::from_rows(rows);
  } catch (const DomainError& e) {
    throw SpecError(std::string("matrix CSV: ") + e.what());
  }
}

inline void write_matrix_csv(std::ostream& out, const SquareMatrix& m) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < m.n(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

/// Loads a copula from a JSON spec, or from a matrix CSV when the path ends
/// in ".csv".
inline Copula load_copula(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return Copula(GridCopula(read_matrix_csv(in)));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError(path + ": " + e.what());
  }
  return copula_from_json(j, std::filesystem::path(path).parent_path());
}

inline void save_copula(const std::string& path, const Copula& c) {
  std::ofstream out(path);
  if (!out) throw SpecError("cannot write " + path);
  out << copula_to_json(c).dump(2) << '\n';
}

inline json to_json(const IntervalFamily& f) {
  json a = json::array();
  for (const auto& iv : f) a.push_back({iv.lo, iv.hi});
  return a;
}

inline json to_json(const MonotonicityVerdict& v) {
  return {{"si", v.si},
          {"sd", v.sd},
          {"component", v.component},
          {"max_violation", v.max_violation},
          {"witness", {v.x1, v.x2, v.y}}};
}

inline json to_json(const DecompositionReport& d) {
  return {{"intervals", to_json(d.intervals)},
          {"block_gaps", d.block_gaps},
          {"max_block_gap", d.max_block_gap},
          {"verified", d.verified}};
}

inline json to_json(const IterateReport& r) {
  return {{"n_steps", r.n_steps},
          {"limit", copula_to_json(r.limit)},
          {"intervals", to_json(r.intervals)},
          {"sup_gap", r.sup_gap},
          {"monotone_decrease_violation", r.monotone_decrease_violation},
          {"converged", r.converged}};
}

}  // namespace copula
