#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "carbonfisc/error.hpp"
#include "carbonfisc/wdi_store.hpp"

namespace carbonfisc {

// 0.13% emission reduction per US$/tCO2, as a fraction.
inline constexpr double kDefaultEfficacy = 0.0013;

// The carbon tax whose revenue replaces all other tax revenue.
struct LongRunTax {
  std::optional<double> tax;  // empty when no tax raises the required revenue

  bool feasible() const { return tax.has_value(); }
};

struct LeviathanRecord {
  std::string country;
  double short_run_tax = 0.0;
  LongRunTax long_run;
  double emission_share = 0.0;
  double cumulative_emission_share = 0.0;
};

// revenue_share / intensity, i.e. total tax revenue over total emissions.
inline double short_run_leviathan(double revenue_share, double intensity) {
  if (!(revenue_share >= 0.0)) throw DataError("revenue share must be nonnegative");
  if (!(intensity > 0.0)) throw DataError("no emissions to tax: intensity must be positive");
  return revenue_share / intensity;
}

// Tax T with T * (1 - efficacy * T) = short_run, taking the smaller root.
// Infeasible once the required revenue exceeds the peak of that revenue
// curve, i.e. 4 * efficacy * short_run > 1.
inline LongRunTax long_run_leviathan(double short_run, double efficacy = kDefaultEfficacy) {
  if (!(efficacy >= 0.0 && efficacy < 1.0)) throw DataError("efficacy must lie in [0, 1)");
  if (!(short_run > 0.0)) throw DataError("short-run Leviathan tax must be positive");
  if (efficacy == 0.0) return {short_run};
  const double disc = 1.0 - 4.0 * efficacy * short_run;
  if (disc < 0.0) return {};
  // 2*T0 / (1 + sqrt(disc)) equals (1 - sqrt(disc)) / (2*eps) without the
  // cancellation when eps*T0 is small.
  return {2.0 * short_run / (1.0 + std::sqrt(disc))};
}

// Countries ranked by ascending short-run tax (ties by country code) with
// cumulative emission shares accumulated along the ranking.
inline std::vector<LeviathanRecord> leviathan_curve(const CountryPanel& panel, int year,
                                                    double efficacy = kDefaultEfficacy) {
  const auto records = panel.complete_records(year);
  if (records.empty()) {
    throw DataError("Leviathan curve: no complete country records for " + std::to_string(year));
  }
  double total = 0.0;
  for (const auto* r : records) total += r->ghg_emissions;
  std::vector<LeviathanRecord> out;
  out.reserve(records.size());
  for (const auto* r : records) {
    const auto is = intensity_and_share(panel, r->country, year);
    const double t0 = short_run_leviathan(is->revenue_share, is->emission_intensity);
    LeviathanRecord rec{r->country, t0, {}, r->ghg_emissions / total, 0.0};
    // A country with no other tax revenue needs no carbon tax.
    rec.long_run = t0 > 0.0 ? long_run_leviathan(t0, efficacy) : LongRunTax{0.0};
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const LeviathanRecord& a, const LeviathanRecord& b) {
    if (a.short_run_tax != b.short_run_tax) return a.short_run_tax < b.short_run_tax;
    return a.country < b.country;
  });
  double cumulative = 0.0;
  for (auto& r : out) {
    cumulative += r.emission_share;
    r.cumulative_emission_share = std::min(cumulative, 1.0);
  }
  return out;
}

}  // namespace carbonfisc
