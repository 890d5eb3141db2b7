#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "carbonfisc/csv.hpp"
#include "carbonfisc/error.hpp"
#include "carbonfisc/scenario_store.hpp"

namespace carbonfisc {

struct PairEntry {
  std::string model;
  std::string policy;
  std::string baseline;

  auto operator<=>(const PairEntry&) const = default;
};

class PairMap {
 public:
  PairMap() = default;

  // Rejects a policy scenario listed twice for the same model.
  PairMap(std::vector<PairEntry> entries, std::string source = {}) : source_(std::move(source)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (auto& e : entries) {
      if (e.model.empty() || e.policy.empty() || e.baseline.empty()) {
        throw DataError("pair map entry with an empty field");
      }
      if (!seen.emplace(e.model, e.policy).second) {
        throw DataError("pair map lists policy scenario '" + e.policy + "' twice for model '" +
                        e.model + "'");
      }
      entries_.push_back(std::move(e));
    }
  }

  // CSV `model,policy_scenario,baseline_scenario`; '#' lines are comments.
  // A header row with those names is optional. Extra columns are ignored.
  static PairMap parse(std::istream& in, std::string source = "<stream>") {
    csv::Reader reader(in);
    std::vector<PairEntry> entries;
    bool first = true;
    while (auto rec = reader.next()) {
      auto& f = rec->fields;
      if (!f.empty() && !f[0].empty() && f[0].front() == '#') continue;
      if (first && !f.empty() && detail::lower(f[0]) == "model") {
        first = false;
        continue;
      }
      first = false;
      if (f.size() < 3) {
        throw DataError(source + " line " + std::to_string(rec->line) + ": expected 3 columns");
      }
      entries.push_back({f[0], f[1], f[2]});
    }
    return PairMap(std::move(entries), std::move(source));
  }

  static PairMap load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pair map " + path.string());
    return parse(in, path.string());
  }

  const std::vector<PairEntry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<PairEntry> entries_;
  std::string source_;
};

// A policy scenario bound to its baseline in one region. Holds a pointer to
// the store, which must outlive it.
class PairedScenario {
 public:
  PairedScenario(const ScenarioStore& store, std::string model, std::string region,
                 std::string policy, std::string baseline)
      : store_(&store),
        model_(std::move(model)),
        region_(std::move(region)),
        policy_(std::move(policy)),
        baseline_(std::move(baseline)) {}

  const std::string& model() const { return model_; }
  const std::string& region() const { return region_; }
  const std::string& policy() const { return policy_; }
  const std::string& baseline() const { return baseline_; }

  ScenarioKey policy_key() const { return {model_, policy_, region_}; }
  ScenarioKey baseline_key() const { return {model_, baseline_, region_}; }

  std::optional<double> policy_value(Variable v, int year) const {
    return store_->value(policy_key(), v, year);
  }
  std::optional<double> baseline_value(Variable v, int year) const {
    return store_->value(baseline_key(), v, year);
  }

  const ScenarioStore& store() const { return *store_; }

 private:
  const ScenarioStore* store_;
  std::string model_;
  std::string region_;
  std::string policy_;
  std::string baseline_;
};

struct PairingResult {
  std::vector<PairedScenario> pairs;
  std::vector<std::string> issues;
};

// One pair per (entry, region present in both scenarios). Output is sorted by
// (model, policy, region), so entry order does not matter.
inline PairingResult apply_pair_map(const ScenarioStore& store, const PairMap& map) {
  PairingResult out;
  std::vector<PairEntry> sorted = map.entries();
  std::sort(sorted.begin(), sorted.end());
  for (const auto& e : sorted) {
    const auto policy_regions = store.list_regions(e.model, e.policy);
    const auto baseline_regions = store.list_regions(e.model, e.baseline);
    if (policy_regions.empty()) {
      out.issues.push_back(e.model + " / " + e.policy + ": policy scenario not in store");
      continue;
    }
    if (baseline_regions.empty()) {
      out.issues.push_back(e.model + " / " + e.policy + ": baseline '" + e.baseline +
                           "' not in store");
      continue;
    }
    for (const auto& region : policy_regions) {
      if (!std::binary_search(baseline_regions.begin(), baseline_regions.end(), region)) {
        out.issues.push_back(e.model + " / " + e.policy + ": baseline '" + e.baseline +
                             "' has no region '" + region + "', pair dropped");
        continue;
      }
      out.pairs.emplace_back(store, e.model, region, e.policy, e.baseline);
    }
  }
  if (out.pairs.empty()) throw DataError("no pairs: pair map matched nothing in the store");
  return out;
}

// 100 * (baseline - policy) / baseline; positive is a reduction.
inline Expected<double> relative_reduction(const PairedScenario& pair, Variable v, int year) {
  const auto policy = pair.policy_value(v, year);
  const auto baseline = pair.baseline_value(v, year);
  const std::string where = pair.model() + " / " + pair.policy() + " / " + pair.region() + " / " +
                            to_string(v) + " / " + std::to_string(year);
  if (!policy || !baseline) return Issue{IssueKind::MissingObservation, where};
  if (*baseline == 0.0) return Issue{IssueKind::DegenerateBaseline, where};
  return 100.0 * (*baseline - *policy) / *baseline;
}

struct PairSuggestion {
  std::string model;
  std::string policy;
  std::string baseline;
  double confidence = 0.0;
  bool tie = false;  // several baselines shared the longest prefix
};

struct SuggestionResult {
  std::vector<PairSuggestion> suggestions;
  std::vector<std::string> report;
};

namespace detail {

inline bool is_baseline_name(std::string_view name) {
  static const std::set<std::string> markers{"base", "baseline", "ref", "nopolicy", "npi"};
  std::string token;
  auto flush = [&]() {
    const bool hit = markers.count(lower(token)) != 0;
    token.clear();
    return hit;
  };
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(c);
    } else if (flush()) {
      return true;
    }
  }
  return flush();
}

inline std::size_t shared_prefix(std::string_view a, std::string_view b) {
  const auto n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace detail

// Advisory only: proposes a baseline for every non-baseline scenario. A name
// is a baseline candidate when one of its alphanumeric tokens is a baseline
// marker.
inline SuggestionResult suggest_pairs(const ScenarioStore& store) {
  SuggestionResult out;
  for (const auto& model : store.list_models()) {
    const auto scenarios = store.list_scenarios(model);
    std::vector<std::string> baselines, policies;
    for (const auto& s : scenarios)
      (detail::is_baseline_name(s) ? baselines : policies).push_back(s);
    if (scenarios.size() < 2) {
      out.report.push_back(model + ": single scenario, nothing to pair");
      continue;
    }
    if (baselines.empty()) {
      out.report.push_back(model + ": no baseline candidate");
      continue;
    }
    if (policies.empty()) {
      out.report.push_back(model + ": no policy scenario");
      continue;
    }
    for (const auto& policy : policies) {
      // baselines is lexicographically sorted, so the first best wins ties
      std::size_t best_len = 0;
      const std::string* best = nullptr;
      bool tie = false;
      for (const auto& b : baselines) {
        const auto len = detail::shared_prefix(policy, b);
        if (!best || len > best_len) {
          best = &b;
          best_len = len;
          tie = false;
        } else if (len == best_len) {
          tie = true;
        }
      }
      const double confidence = static_cast<double>(best_len) / static_cast<double>(policy.size());
      out.suggestions.push_back({model, policy, *best, confidence, tie});
      if (tie) out.report.push_back(model + " / " + policy + ": tied baselines, low confidence");
    }
  }
  return out;
}

inline void write_suggestions(std::ostream& os, const SuggestionResult& result) {
  os << "model,policy_scenario,baseline_scenario,confidence\n";
  for (const auto& s : result.suggestions) {
    if (s.tie) os << "# tie: low confidence, review the baseline below\n";
    csv::write_row(os, {s.model, s.policy, s.baseline, csv::format_double(s.confidence)});
  }
}

}  // namespace carbonfisc
