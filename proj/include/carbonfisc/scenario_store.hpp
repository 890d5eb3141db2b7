#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbonfisc/csv.hpp"
#include "carbonfisc/error.hpp"
#include "carbonfisc/hash.hpp"
#include "carbonfisc/units.hpp"

namespace carbonfisc {

inline constexpr std::string_view kWorldRegion = "World";

struct ScenarioKey {
  std::string model;
  std::string scenario;
  std::string region;

  auto operator<=>(const ScenarioKey&) const = default;
};

struct VariableSeries {
  Variable variable = Variable::CarbonPrice;
  std::string unit;
  std::map<int, double> values;

  std::optional<double> at(int year) const {
    const auto it = values.find(year);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
  bool operator==(const VariableSeries&) const = default;
};

// Which database variable strings feed which canonical variable. Several
// source strings may feed one canonical variable; their values are summed.
class VariableMapping {
 public:
  static VariableMapping defaults() {
    VariableMapping m;
    m.sources_ = {
        {"Price|Carbon", Variable::CarbonPrice},
        {"Emissions|CO2", Variable::GrossCO2Emissions},
        {"Carbon Sequestration|CCS", Variable::CO2Sequestration},
        {"Carbon Sequestration|Land Use", Variable::CO2Sequestration},
        {"GDP|MER", Variable::GDP},
    };
    return m;
  }

  // Format: one directive per line, '#' starts a comment.
  //   variable <database variable> = <CarbonPrice|GrossCO2Emissions|CO2Sequestration|GDP>
  //   model <canonical family name> = <alias target>
  //   canonicalize_models = true|false
  static VariableMapping parse(std::istream& in) {
    VariableMapping m;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = csv::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("mapping line " + std::to_string(line_no) + ": expected '='");
      }
      const std::string_view lhs = csv::trim(line.substr(0, eq));
      const std::string value(csv::trim(line.substr(eq + 1)));
      if (lhs.rfind("variable ", 0) == 0) {
        const std::string source(csv::trim(lhs.substr(9)));
        const auto var = variable_from_string(value);
        if (!var || source.empty()) {
          throw ConfigError("mapping line " + std::to_string(line_no) +
                            ": unknown canonical variable '" + value + "'");
        }
        m.sources_[source] = *var;
      } else if (lhs.rfind("model ", 0) == 0) {
        const std::string from(csv::trim(lhs.substr(6)));
        if (from.empty() || value.empty()) {
          throw ConfigError("mapping line " + std::to_string(line_no) + ": empty model alias");
        }
        m.aliases_[from] = value;
      } else if (lhs == "canonicalize_models") {
        if (value != "true" && value != "false") {
          throw ConfigError("mapping line " + std::to_string(line_no) +
                            ": canonicalize_models must be true or false");
        }
        m.canonicalize_ = value == "true";
      } else {
        throw ConfigError("mapping line " + std::to_string(line_no) + ": unknown directive '" +
                          std::string(lhs) + "'");
      }
    }
    if (m.sources_.empty()) throw ConfigError("mapping defines no variables");
    return m;
  }

  static VariableMapping load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open variable mapping " + path.string());
    return parse(in);
  }

  std::string serialize() const {
    std::ostringstream os;
    for (const auto& [src, var] : sources_) os << "variable " << src << " = " << to_string(var) << '\n';
    for (const auto& [from, to] : aliases_) os << "model " << from << " = " << to << '\n';
    os << "canonicalize_models = " << (canonicalize_ ? "true" : "false") << '\n';
    return os.str();
  }

  std::string hash() const { return sha256_hex(serialize()); }

  // Canonical ids ("CarbonPrice", ...) always map to themselves so that an
  // exported store reloads under any mapping.
  std::optional<Variable> lookup(std::string_view source) const {
    const auto it = sources_.find(std::string(source));
    if (it != sources_.end()) return it->second;
    return variable_from_string(source);
  }

  // Family name: text before the first space or '/', then alias lookup.
  std::string canonical_model(std::string_view name) const {
    std::string out(name);
    if (canonicalize_) {
      const auto cut = out.find_first_of(" /");
      if (cut != std::string::npos && cut > 0) out.resize(cut);
    }
    const auto it = aliases_.find(out);
    return it == aliases_.end() ? out : it->second;
  }

  bool canonicalize_models() const { return canonicalize_; }
  void set_canonicalize_models(bool on) { canonicalize_ = on; }
  void set_source(std::string source, Variable v) { sources_[std::move(source)] = v; }
  void add_alias(std::string from, std::string to) { aliases_[std::move(from)] = std::move(to); }

 private:
  std::map<std::string, Variable> sources_;
  std::map<std::string, std::string> aliases_;
  bool canonicalize_ = true;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct LoadReport {
  std::size_t data_rows = 0;
  std::size_t stored_rows = 0;
  std::size_t skipped_rows = 0;
  std::size_t error_rows = 0;
  std::map<std::string, std::size_t> skipped_variables;
  std::vector<RowError> errors;

  bool conserved() const { return stored_rows + skipped_rows + error_rows == data_rows; }

  std::string to_text() const {
    std::ostringstream os;
    os << "data rows:    " << data_rows << '\n'
       << "stored rows:  " << stored_rows << '\n'
       << "skipped rows: " << skipped_rows << '\n'
       << "error rows:   " << error_rows << '\n';
    if (!skipped_variables.empty()) {
      os << "unmapped variables:\n";
      for (const auto& [name, n] : skipped_variables) os << "  " << name << ": " << n << '\n';
    }
    for (const auto& e : errors) os << "line " << e.line << ": " << e.message << '\n';
    return os.str();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["data_rows"] = data_rows;
    j["stored_rows"] = stored_rows;
    j["skipped_rows"] = skipped_rows;
    j["error_rows"] = error_rows;
    j["unmapped_variables"] = skipped_variables;
    auto errs = nlohmann::ordered_json::array();
    for (const auto& e : errors) errs.push_back({{"line", e.line}, {"message", e.message}});
    j["errors"] = std::move(errs);
    return j;
  }
};

struct StoreProvenance {
  std::string source;
  std::string mapping_hash;
};

class ScenarioStore {
 public:
  using SeriesMap = std::map<Variable, VariableSeries>;
  using Entries = std::map<ScenarioKey, SeriesMap>;

  ScenarioStore() = default;

  // Every series must already be in canonical units with no NaN values.
  ScenarioStore(Entries entries, StoreProvenance provenance)
      : entries_(std::move(entries)), provenance_(std::move(provenance)) {
    for (const auto& [key, series] : entries_) {
      if (key.model.empty() || key.scenario.empty() || key.region.empty()) {
        throw InvariantError("scenario key with empty field");
      }
      for (const auto& [var, s] : series) {
        if (s.variable != var || s.unit != canonical_unit(var)) {
          throw InvariantError("series for " + key.model + "/" + key.scenario + "/" + key.region +
                               " is not in canonical units");
        }
        for (const auto& [year, v] : s.values) {
          if (std::isnan(v)) throw InvariantError("NaN stored in scenario series");
        }
      }
    }
  }

  const VariableSeries* query(const ScenarioKey& key, Variable v) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    const auto jt = it->second.find(v);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  std::optional<double> value(const ScenarioKey& key, Variable v, int year) const {
    const auto* s = query(key, v);
    return s ? s->at(year) : std::nullopt;
  }

  std::vector<std::string> list_models() const {
    std::set<std::string> names;
    for (const auto& [key, _] : entries_) names.insert(key.model);
    return {names.begin(), names.end()};
  }

  std::vector<std::string> list_scenarios(std::string_view model) const {
    std::set<std::string> names;
    for (const auto& [key, _] : entries_)
      if (key.model == model) names.insert(key.scenario);
    return {names.begin(), names.end()};
  }

  std::vector<std::string> list_regions(std::string_view model, std::string_view scenario) const {
    std::vector<std::string> out;
    for (const auto& [key, _] : entries_)
      if (key.model == model && key.scenario == scenario) out.push_back(key.region);
    return out;  // map order is already (model, scenario, region) sorted
  }

  bool contains(const ScenarioKey& key) const { return entries_.count(key) != 0; }

  const Entries& entries() const { return entries_; }
  const StoreProvenance& provenance() const { return provenance_; }

  std::size_t series_count() const {
    std::size_t n = 0;
    for (const auto& [_, s] : entries_) n += s.size();
    return n;
  }

  bool operator==(const ScenarioStore& other) const { return entries_ == other.entries_; }

 private:
  Entries entries_;
  StoreProvenance provenance_;
};

struct ScenarioLoad {
  ScenarioStore store;
  LoadReport report;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_missing_cell(std::string_view cell) {
  const std::string l = lower(csv::trim(cell));
  return l.empty() || l == "na" || l == "nan" || l == "n/a";
}

}  // namespace detail

inline ScenarioLoad load_scenario_database(std::istream& in, const VariableMapping& mapping,
                                           std::string source_name = "<stream>") {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw DataError(source_name + ": empty scenario file");

  static constexpr const char* kRequired[] = {"model", "scenario", "region", "variable", "unit"};
  std::size_t col[5];
  for (int r = 0; r < 5; ++r) {
    const auto it = std::find_if(header->fields.begin(), header->fields.end(),
                                 [&](const std::string& f) { return detail::lower(f) == kRequired[r]; });
    if (it == header->fields.end()) {
      std::string name = kRequired[r];
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      throw DataError(source_name + ": header is missing required column '" + name + "'");
    }
    col[r] = static_cast<std::size_t>(it - header->fields.begin());
  }
  std::vector<std::pair<std::size_t, int>> year_cols;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    if (const auto y = csv::parse_int(header->fields[i])) year_cols.emplace_back(i, *y);
  }

  // (key, canonical variable) -> source variable -> year -> value
  std::map<std::pair<ScenarioKey, Variable>, std::map<std::string, std::map<int, double>>> staging;
  LoadReport report;

  while (auto rec = reader.next()) {
    ++report.data_rows;
    const auto& f = rec->fields;
    auto fail = [&](std::string msg) {
      ++report.error_rows;
      report.errors.push_back({rec->line, std::move(msg)});
    };
    if (f.size() < header->fields.size()) {
      fail("row has " + std::to_string(f.size()) + " fields, header has " +
           std::to_string(header->fields.size()));
      continue;
    }
    const std::string& var_name = f[col[3]];
    const auto var = mapping.lookup(var_name);
    if (!var) {
      ++report.skipped_rows;
      ++report.skipped_variables[var_name];
      continue;
    }
    ScenarioKey key{mapping.canonical_model(f[col[0]]), f[col[1]], f[col[2]]};
    if (key.model.empty() || key.scenario.empty() || key.region.empty()) {
      fail("empty model, scenario or region");
      continue;
    }
    double factor = 1.0;
    try {
      factor = conversion_factor(*var, f[col[4]]);
    } catch (const UnitError& e) {
      fail(e.what());
      continue;
    }
    std::map<int, double> values;
    bool bad_cell = false;
    for (const auto& [idx, year] : year_cols) {
      if (detail::is_missing_cell(f[idx])) continue;
      const auto v = csv::parse_double(f[idx]);
      if (!v || !std::isfinite(*v)) {
        fail("non-numeric value '" + f[idx] + "' in year " + std::to_string(year));
        bad_cell = true;
        break;
      }
      values[year] = *v * factor;
    }
    if (bad_cell) continue;

    auto& slot = staging[{key, *var}][var_name];
    for (const auto& [year, v] : values) {
      const auto [it, inserted] = slot.emplace(year, v);
      if (!inserted && it->second != v) {
        throw DataError(source_name + " line " + std::to_string(rec->line) +
                        ": conflicting duplicate for " + key.model + " / " + key.scenario + " / " +
                        key.region + " / " + var_name + " in " + std::to_string(year));
      }
    }
    ++report.stored_rows;
  }

  ScenarioStore::Entries entries;
  for (const auto& [kv, sources] : staging) {
    VariableSeries series{kv.second, canonical_unit(kv.second), {}};
    for (const auto& [src, values] : sources)
      for (const auto& [year, v] : values) series.values[year] += v;
    entries[kv.first][kv.second] = std::move(series);
  }
  return {ScenarioStore(std::move(entries), {std::move(source_name), mapping.hash()}), std::move(report)};
}

inline ScenarioLoad load_scenario_database(const std::filesystem::path& path,
                                           const VariableMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scenario database " + path.string());
  return load_scenario_database(in, mapping, path.string());
}

// Wide-format export with canonical variable ids and units. Reloading the
// output reproduces the store exactly.
inline void export_scenario_store(const ScenarioStore& store, std::ostream& os) {
  std::set<int> years;
  for (const auto& [_, series] : store.entries())
    for (const auto& [__, s] : series)
      for (const auto& [y, ___] : s.values) years.insert(y);
  std::vector<std::string> header{"Model", "Scenario", "Region", "Variable", "Unit"};
  for (int y : years) header.push_back(std::to_string(y));
  csv::write_row(os, header);
  for (const auto& [key, series] : store.entries()) {
    for (const auto& [var, s] : series) {
      std::vector<std::string> row{key.model, key.scenario, key.region, to_string(var), s.unit};
      for (int y : years) {
        const auto v = s.at(y);
        row.push_back(v ? csv::format_double(*v) : std::string());
      }
      csv::write_row(os, row);
    }
  }
}

}  // namespace carbonfisc
