#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "carbonfisc/error.hpp"
#include "carbonfisc/pairing.hpp"

namespace carbonfisc {

inline constexpr int kEfficacyYear = 2030;

// Percent emission reduction from baseline per US$/tCO2 of carbon price.
struct EfficacyObservation {
  std::string model;
  std::string policy;
  std::string region;
  int year = kEfficacyYear;
  double reduction_pct = 0.0;
  double price = 0.0;
  double efficacy = 0.0;
};

struct ModelEfficacy {
  std::string model;
  std::size_t n = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  bool zero_variance = false;  // n == 1, standard error undefined and set to 0
};

struct Exclusion {
  std::string model;
  std::string policy;
  std::string reason;
};

struct EfficacyRun {
  std::vector<EfficacyObservation> observations;
  std::vector<Exclusion> exclusions;
};

inline Expected<EfficacyObservation> scenario_efficacy(const PairedScenario& pair,
                                                       int year = kEfficacyYear) {
  if (pair.region() != kWorldRegion) return Issue{IssueKind::NotGlobal, pair.region()};
  const auto price = pair.policy_value(Variable::CarbonPrice, year);
  if (!price) {
    return Issue{IssueKind::MissingObservation, "carbon price in " + std::to_string(year)};
  }
  if (!(*price > 0.0)) return Issue{IssueKind::NonpositivePrice, csv::format_double(*price)};
  const auto reduction = relative_reduction(pair, Variable::GrossCO2Emissions, year);
  if (!reduction) return reduction.issue();
  return EfficacyObservation{pair.model(), pair.policy(), pair.region(), year,
                             *reduction,   *price,        *reduction / *price};
}

// Efficacy for every World pair; others are ignored, failures are recorded.
inline EfficacyRun compute_efficacy(std::span<const PairedScenario> pairs, int year = kEfficacyYear) {
  EfficacyRun run;
  for (const auto& pair : pairs) {
    if (pair.region() != kWorldRegion) continue;
    auto obs = scenario_efficacy(pair, year);
    if (obs) {
      run.observations.push_back(*obs);
    } else {
      run.exclusions.push_back({pair.model(), pair.policy(), obs.issue().message()});
    }
  }
  return run;
}

// Per-model unweighted mean and standard error of the mean, sorted by
// descending mean (ties by name).
inline std::vector<ModelEfficacy> model_efficacy(std::span<const EfficacyObservation> observations) {
  struct Acc {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& o : observations) {
    if (!std::isfinite(o.efficacy)) throw InvariantError("non-finite efficacy for " + o.model);
    auto& a = acc[o.model];
    ++a.n;
    const double delta = o.efficacy - a.mean;
    a.mean += delta / static_cast<double>(a.n);
    a.m2 += delta * (o.efficacy - a.mean);
  }
  std::vector<ModelEfficacy> out;
  for (const auto& [model, a] : acc) {
    ModelEfficacy m{model, a.n, a.mean, 0.0, a.n == 1};
    if (a.n > 1) {
      const double var = a.m2 / static_cast<double>(a.n - 1);
      m.standard_error = std::sqrt(var / static_cast<double>(a.n));
    }
    out.push_back(m);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ModelEfficacy& a, const ModelEfficacy& b) { return a.mean > b.mean; });
  return out;
}

}  // namespace carbonfisc
