#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "carbonfisc/csv.hpp"
#include "carbonfisc/error.hpp"
#include "carbonfisc/scenario_store.hpp"

namespace carbonfisc {

struct IndicatorCodes {
  std::string tax_revenue_pct_gdp = "GC.TAX.TOTL.GD.ZS";
  std::string ghg_emissions_kt;  // no default, the dataset vintage decides
  std::string gdp_current_usd;
};

struct IndicatorFiles {
  std::filesystem::path tax;
  std::filesystem::path ghg;
  std::filesystem::path gdp;
};

struct CountryYearRecord {
  std::string country;  // ISO3
  int year = 0;
  double tax_revenue_share = 0.0;  // fraction of GDP
  double ghg_emissions = 0.0;      // kt CO2eq per year
  double gdp = 0.0;                // current US$ per year
};

struct IntensityShare {
  double emission_intensity = 0.0;  // t CO2eq per US$
  double revenue_share = 0.0;
};

struct PanelAggregate {
  std::size_t countries = 0;
  double emissions_t = 0.0;
  double gdp = 0.0;
  double tax_revenue = 0.0;
  double emission_intensity = 0.0;
  double revenue_share = 0.0;
};

struct CoverageEntry {
  std::string country;
  std::string reason;
};

struct CoverageReport {
  int year = 0;
  std::size_t complete = 0;
  std::vector<CoverageEntry> incomplete;
  std::vector<RowError> row_errors;
};

// World Bank regional and income-group aggregates; they are not countries.
inline const std::set<std::string>& world_bank_aggregates() {
  static const std::set<std::string> codes{
      "AFE", "AFW", "ARB", "CEB", "CSS", "EAP", "EAR", "EAS", "ECA", "ECS", "EMU", "EUU",
      "FCS", "HIC", "HPC", "IBD", "IBT", "IDA", "IDB", "IDX", "INX", "LAC", "LCN", "LDC",
      "LIC", "LMC", "LMY", "LTE", "MEA", "MIC", "MNA", "NAC", "OED", "OSS", "PRE", "PSS",
      "PST", "SAS", "SSA", "SSF", "SST", "TEA", "TEC", "TLA", "TMN", "TSA", "TSS", "UMC",
      "WLD"};
  return codes;
}

class CountryPanel {
 public:
  using Key = std::pair<std::string, int>;

  const CountryYearRecord* find(const std::string& country, int year) const {
    const auto it = records_.find({country, year});
    return it == records_.end() ? nullptr : &it->second;
  }

  std::vector<const CountryYearRecord*> complete_records(int year) const {
    std::vector<const CountryYearRecord*> out;
    for (const auto& [key, rec] : records_)
      if (key.second == year) out.push_back(&rec);
    return out;
  }

  CoverageReport coverage(int year) const {
    CoverageReport r;
    r.year = year;
    r.row_errors = row_errors_;
    for (const auto& country : countries_) {
      if (records_.count({country, year})) {
        ++r.complete;
        continue;
      }
      const auto it = incomplete_.find({country, year});
      r.incomplete.push_back({country, it == incomplete_.end() ? "no data for year" : it->second});
    }
    return r;
  }

  const std::map<Key, CountryYearRecord>& records() const { return records_; }

 private:
  friend CountryPanel load_indicator_panel(const IndicatorFiles&, const IndicatorCodes&, bool);
  friend CountryPanel make_panel(std::vector<CountryYearRecord>);

  std::map<Key, CountryYearRecord> records_;
  std::map<Key, std::string> incomplete_;
  std::set<std::string> countries_;
  std::vector<RowError> row_errors_;
};

namespace detail {

inline std::size_t find_column(const std::vector<std::string>& header,
                               std::initializer_list<const char*> names, const std::string& file,
                               const char* label) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = lower(header[i]);
    std::replace(h.begin(), h.end(), '_', ' ');
    for (const char* n : names)
      if (h == n) return i;
  }
  throw DataError(file + ": header has no " + label + " column");
}

// year -> country -> value for one indicator file
inline std::map<std::pair<std::string, int>, double> read_indicator(
    const std::filesystem::path& path, const std::string& expected_code, double scale,
    std::vector<RowError>& errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open indicator file " + path.string());
  const std::string name = path.string();
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw DataError(name + ": empty indicator file");
  const auto c_country =
      find_column(header->fields, {"country code", "countrycode", "iso3", "country"}, name, "country code");
  const auto c_indicator = find_column(
      header->fields, {"indicator code", "indicatorcode", "indicator", "series code"}, name, "indicator code");
  const auto c_year = find_column(header->fields, {"year", "date"}, name, "year");
  const auto c_value = find_column(header->fields, {"value"}, name, "value");
  const std::size_t need = std::max({c_country, c_indicator, c_year, c_value}) + 1;

  std::map<std::pair<std::string, int>, double> out;
  while (auto rec = reader.next()) {
    const auto& f = rec->fields;
    if (f.size() < need) {
      errors.push_back({rec->line, name + ": short row"});
      continue;
    }
    if (f[c_indicator] != expected_code) {
      throw DataError(name + " line " + std::to_string(rec->line) + ": unknown indicator code '" +
                      f[c_indicator] + "' (expected " + expected_code + ")");
    }
    if (is_missing_cell(f[c_value])) continue;
    const auto year = csv::parse_int(f[c_year]);
    const auto v = csv::parse_double(f[c_value]);
    if (!year || !v || !std::isfinite(*v)) {
      errors.push_back({rec->line, name + ": non-numeric year or value"});
      continue;
    }
    out[{f[c_country], *year}] = *v * scale;
  }
  return out;
}

}  // namespace detail

inline CountryPanel load_indicator_panel(const IndicatorFiles& files, const IndicatorCodes& codes,
                                         bool exclude_aggregates = true) {
  if (codes.ghg_emissions_kt.empty() || codes.gdp_current_usd.empty()) {
    throw ConfigError("emissions and GDP indicator codes must be supplied");
  }
  CountryPanel panel;
  const auto tax = detail::read_indicator(files.tax, codes.tax_revenue_pct_gdp, 0.01, panel.row_errors_);
  const auto ghg = detail::read_indicator(files.ghg, codes.ghg_emissions_kt, 1.0, panel.row_errors_);
  const auto gdp = detail::read_indicator(files.gdp, codes.gdp_current_usd, 1.0, panel.row_errors_);

  std::set<CountryPanel::Key> keys;
  for (const auto* m : {&tax, &ghg, &gdp})
    for (const auto& [k, _] : *m) keys.insert(k);

  for (const auto& key : keys) {
    if (exclude_aggregates && world_bank_aggregates().count(key.first)) continue;
    panel.countries_.insert(key.first);
    const auto t = tax.find(key), e = ghg.find(key), g = gdp.find(key);
    std::string missing;
    if (t == tax.end()) missing += " tax";
    if (e == ghg.end()) missing += " emissions";
    if (g == gdp.end()) missing += " gdp";
    if (!missing.empty()) {
      panel.incomplete_[key] = "missing" + missing;
      continue;
    }
    if (!(t->second >= 0.0 && t->second < 1.0)) {
      panel.incomplete_[key] = "tax revenue share outside [0, 1)";
    } else if (!(e->second > 0.0)) {
      panel.incomplete_[key] = "nonpositive emissions";
    } else if (!(g->second > 0.0)) {
      panel.incomplete_[key] = "nonpositive GDP";
    } else {
      panel.records_[key] = {key.first, key.second, t->second, e->second, g->second};
    }
  }
  return panel;
}

// In-memory panel; records that break the invariants are rejected.
inline CountryPanel make_panel(std::vector<CountryYearRecord> records) {
  CountryPanel panel;
  for (auto& r : records) {
    panel.countries_.insert(r.country);
    const CountryPanel::Key key{r.country, r.year};
    if (!(r.tax_revenue_share >= 0.0 && r.tax_revenue_share < 1.0) || !(r.ghg_emissions > 0.0) ||
        !(r.gdp > 0.0)) {
      panel.incomplete_[key] = "record violates panel invariants";
      continue;
    }
    panel.records_[key] = std::move(r);
  }
  return panel;
}

inline Expected<IntensityShare> intensity_and_share(const CountryPanel& panel,
                                                    const std::string& country, int year) {
  const auto* rec = panel.find(country, year);
  if (!rec) return Issue{IssueKind::MissingCountry, country + " " + std::to_string(year)};
  return IntensityShare{rec->ghg_emissions * 1000.0 / rec->gdp, rec->tax_revenue_share};
}

// Panel-wide totals over complete records for one year.
inline PanelAggregate global_aggregate(const CountryPanel& panel, int year) {
  PanelAggregate a;
  for (const auto* rec : panel.complete_records(year)) {
    ++a.countries;
    a.emissions_t += rec->ghg_emissions * 1000.0;
    a.gdp += rec->gdp;
    a.tax_revenue += rec->tax_revenue_share * rec->gdp;
  }
  if (a.gdp > 0.0) {
    a.emission_intensity = a.emissions_t / a.gdp;
    a.revenue_share = a.tax_revenue / a.gdp;
  }
  return a;
}

}  // namespace carbonfisc
