#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carbonfisc/error.hpp"
#include "carbonfisc/pairing.hpp"

namespace carbonfisc {

inline constexpr int kFiscalYear = 2050;
inline constexpr double kStringencyThreshold = 95.0;
inline constexpr double kOutlierSharePct = 100.0;

// Carbon tax revenue as % of GDP. US$/t times Mt gives million US$; GDP is in
// billion US$.
inline double revenue_share(double price, double gross_emissions, double gdp) {
  if (!(gdp > 0.0)) throw DataError("revenue share: GDP must be positive");
  return 100.0 * (price * gross_emissions) / (gdp * 1000.0);
}

// Sequestration subsidy as % of GDP, negative because it is an outlay.
inline double subsidy_share(double price, double sequestration, double gdp) {
  if (!(gdp > 0.0)) throw DataError("subsidy share: GDP must be positive");
  if (sequestration < 0.0) throw DataError("subsidy share: sequestration must be nonnegative");
  return -100.0 * (price * sequestration) / (gdp * 1000.0);
}

struct FiscalSummary {
  std::string model;
  std::string scenario;  // "mean over scenarios" for model-table rows
  std::string region;
  int year = 0;
  std::size_t scenarios = 1;
  double carbon_price = 0.0;
  double revenue_share = 0.0;
  double subsidy_share = 0.0;
  std::optional<double> reduction_from_baseline;
  bool outlier = false;           // |share| above the sanity limit
  bool negative_revenue = false;  // emissions reported net rather than gross
};

struct FiscalTable {
  std::vector<FiscalSummary> rows;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline void flag(FiscalSummary& s, double outlier_limit) {
  s.outlier = std::abs(s.revenue_share) > outlier_limit || std::abs(s.subsidy_share) > outlier_limit;
  s.negative_revenue = s.revenue_share < 0.0;
}

// Shares for one scenario/region/year; sequestration absent counts as zero.
inline Expected<FiscalSummary> scenario_fiscal(const ScenarioStore& store, const ScenarioKey& key,
                                               int year) {
  const auto price = store.value(key, Variable::CarbonPrice, year);
  const auto emissions = store.value(key, Variable::GrossCO2Emissions, year);
  const auto gdp = store.value(key, Variable::GDP, year);
  const auto seq = store.value(key, Variable::CO2Sequestration, year);
  std::string missing;
  if (!price) missing += " price";
  if (!emissions) missing += " emissions";
  if (!gdp) missing += " gdp";
  if (!missing.empty()) return Issue{IssueKind::MissingObservation, "missing" + missing};
  if (!(*gdp > 0.0)) return Issue{IssueKind::MissingObservation, "nonpositive gdp"};
  if (seq && *seq < 0.0) return Issue{IssueKind::MissingObservation, "negative sequestration"};
  FiscalSummary s;
  s.model = key.model;
  s.scenario = key.scenario;
  s.region = key.region;
  s.year = year;
  s.carbon_price = *price;
  s.revenue_share = revenue_share(*price, *emissions, *gdp);
  s.subsidy_share = subsidy_share(*price, seq.value_or(0.0), *gdp);
  return s;
}

}  // namespace detail

// Per-scenario summaries for World pairs whose emission reduction at `year`
// is at least `threshold` percent.
inline FiscalTable stringent_scenarios(std::span<const PairedScenario> pairs, int year = kFiscalYear,
                                       double threshold = kStringencyThreshold,
                                       double outlier_limit = kOutlierSharePct) {
  FiscalTable out;
  for (const auto& pair : pairs) {
    if (pair.region() != kWorldRegion) continue;
    const auto reduction = relative_reduction(pair, Variable::GrossCO2Emissions, year);
    const std::string where = pair.model() + " / " + pair.policy() + ": ";
    if (!reduction) {
      out.diagnostics.push_back(where + reduction.issue().message());
      continue;
    }
    if (*reduction < threshold) continue;
    auto s = detail::scenario_fiscal(pair.store(), pair.policy_key(), year);
    if (!s) {
      out.diagnostics.push_back(where + s.issue().message());
      continue;
    }
    FiscalSummary row = *s;
    row.reduction_from_baseline = *reduction;
    detail::flag(row, outlier_limit);
    out.rows.push_back(std::move(row));
  }
  return out;
}

// Per-model means over qualifying scenarios, sorted by descending subsidy
// share (smallest outlay first).
inline FiscalTable stringent_model_table(std::span<const PairedScenario> pairs, int year = kFiscalYear,
                                         double threshold = kStringencyThreshold,
                                         double outlier_limit = kOutlierSharePct) {
  auto scenarios = stringent_scenarios(pairs, year, threshold, outlier_limit);
  std::map<std::string, std::vector<const FiscalSummary*>> by_model;
  for (const auto& s : scenarios.rows) by_model[s.model].push_back(&s);

  FiscalTable out;
  out.diagnostics = std::move(scenarios.diagnostics);
  for (const auto& [model, rows] : by_model) {
    FiscalSummary m;
    m.model = model;
    m.scenario = "mean over scenarios";
    m.region = std::string(kWorldRegion);
    m.year = year;
    m.scenarios = rows.size();
    double reduction = 0.0;
    for (const auto* r : rows) {
      m.carbon_price += r->carbon_price;
      m.revenue_share += r->revenue_share;
      m.subsidy_share += r->subsidy_share;
      reduction += *r->reduction_from_baseline;
    }
    const double n = static_cast<double>(rows.size());
    m.carbon_price /= n;
    m.revenue_share /= n;
    m.subsidy_share /= n;
    m.reduction_from_baseline = reduction / n;
    detail::flag(m, outlier_limit);
    if (m.outlier) out.diagnostics.push_back(model + ": share of GDP beyond sanity limit");
    if (m.negative_revenue) out.diagnostics.push_back(model + ": negative revenue, emissions look net of removals");
    out.rows.push_back(std::move(m));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const FiscalSummary& a, const FiscalSummary& b) {
    return a.subsidy_share > b.subsidy_share;
  });
  if (out.rows.empty()) {
    out.diagnostics.push_back("no scenario reduces World emissions by at least " +
                              csv::format_double(threshold) + "% in " + std::to_string(year));
  }
  return out;
}

inline const std::vector<int>& default_panel_years() {
  static const std::vector<int> years{2030, 2040, 2050};
  return years;
}

// Revenue and subsidy shares per (region, year) for one scenario. Regions
// follow `region_order`; unlisted regions come after it, lexicographically.
inline FiscalTable regional_panel(const ScenarioStore& store, const std::string& model,
                                  const std::string& scenario, const std::string& baseline,
                                  const std::vector<int>& years = default_panel_years(),
                                  const std::vector<std::string>& region_order = {},
                                  double outlier_limit = kOutlierSharePct) {
  FiscalTable out;
  auto regions = store.list_regions(model, scenario);
  if (regions.empty()) {
    out.diagnostics.push_back(model + " / " + scenario + ": scenario not in store");
    return out;
  }
  auto rank = [&](const std::string& r) {
    const auto it = std::find(region_order.begin(), region_order.end(), r);
    return static_cast<std::size_t>(it - region_order.begin());
  };
  std::stable_sort(regions.begin(), regions.end(),
                   [&](const std::string& a, const std::string& b) { return rank(a) < rank(b); });
  for (const auto& region : regions) {
    const PairedScenario pair(store, model, region, scenario, baseline);
    for (int year : years) {
      auto s = detail::scenario_fiscal(store, pair.policy_key(), year);
      if (!s) {
        out.diagnostics.push_back(region + " " + std::to_string(year) + ": " + s.issue().message() +
                                  ", skipped");
        continue;
      }
      FiscalSummary row = *s;
      if (const auto red = relative_reduction(pair, Variable::GrossCO2Emissions, year)) {
        row.reduction_from_baseline = *red;
      }
      detail::flag(row, outlier_limit);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

struct SweepPoint {
  std::string scenario;
  std::optional<double> reduction_from_baseline;
  std::optional<double> carbon_price;
  std::optional<double> gdp_loss;
  std::optional<double> gross_emissions;
  std::optional<double> sequestration;
};

struct Sweep {
  std::vector<SweepPoint> points;
  std::vector<std::string> diagnostics;
};

// One point per World policy scenario of `model`, sorted by reduction with
// points lacking a reduction last.
inline Sweep stringency_sweep(std::span<const PairedScenario> pairs, const std::string& model,
                              int year = kFiscalYear) {
  Sweep out;
  for (const auto& pair : pairs) {
    if (pair.model() != model || pair.region() != kWorldRegion) continue;
    SweepPoint p;
    p.scenario = pair.policy();
    if (auto r = relative_reduction(pair, Variable::GrossCO2Emissions, year)) p.reduction_from_baseline = *r;
    if (auto g = relative_reduction(pair, Variable::GDP, year)) p.gdp_loss = *g;
    p.carbon_price = pair.policy_value(Variable::CarbonPrice, year);
    p.gross_emissions = pair.policy_value(Variable::GrossCO2Emissions, year);
    p.sequestration = pair.policy_value(Variable::CO2Sequestration, year);
    std::string missing;
    if (!p.reduction_from_baseline) missing += " reduction";
    if (!p.carbon_price) missing += " price";
    if (!p.gdp_loss) missing += " gdp_loss";
    if (!p.gross_emissions) missing += " emissions";
    if (!p.sequestration) missing += " sequestration";
    if (!missing.empty()) out.diagnostics.push_back(model + " / " + p.scenario + ": missing" + missing);
    out.points.push_back(std::move(p));
  }
  std::sort(out.points.begin(), out.points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    const bool ha = a.reduction_from_baseline.has_value(), hb = b.reduction_from_baseline.has_value();
    if (ha != hb) return ha;
    if (ha && *a.reduction_from_baseline != *b.reduction_from_baseline) {
      return *a.reduction_from_baseline < *b.reduction_from_baseline;
    }
    return a.scenario < b.scenario;
  });
  if (out.points.empty()) out.diagnostics.push_back(model + ": no World pairs");
  return out;
}

}  // namespace carbonfisc
