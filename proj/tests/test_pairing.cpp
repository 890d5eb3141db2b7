#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "carbonfisc/pairing.hpp"
#include "oracles.hpp"

using namespace carbonfisc;

namespace {

ScenarioStore load_text(const std::string& text) {
  std::istringstream in(text);
  return load_scenario_database(in, VariableMapping::defaults()).store;
}

const ScenarioStore& fixture_store() {
  static const ScenarioStore store =
      load_scenario_database(oracle::fixture("fixture_scenarios.csv"), VariableMapping::defaults()).store;
  return store;
}

PairMap map_of(const std::string& text) {
  std::istringstream in(text);
  return PairMap::parse(in);
}

// Two-scenario store with one emissions value per side.
ScenarioStore two_sided(double baseline, double policy) {
  std::ostringstream os;
  os << "Model,Scenario,Region,Variable,Unit,2030\n"
     << "M,Base,World,Emissions|CO2,Mt CO2/yr," << csv::format_double(baseline) << "\n"
     << "M,Pol,World,Emissions|CO2,Mt CO2/yr," << csv::format_double(policy) << "\n";
  return load_text(os.str());
}

}  // namespace

TEST(Suggest, SharedPrefixConfidence) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "IMACLIM,ADVANCE/2030/WB2C,World,GDP|MER,billion US$2010/yr,1\n"
      "IMACLIM,ADVANCE/Baseline,World,GDP|MER,billion US$2010/yr,1\n");
  const auto r = suggest_pairs(store);
  ASSERT_EQ(r.suggestions.size(), 1u);
  const auto& s = r.suggestions.front();
  EXPECT_EQ(s.policy, "ADVANCE/2030/WB2C");
  EXPECT_EQ(s.baseline, "ADVANCE/Baseline");
  EXPECT_EQ(s.confidence, 8.0 / 17.0);
  EXPECT_FALSE(s.tie);
}

TEST(Suggest, SingleScenarioModelReported) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "SOLO,OnlyRun,World,GDP|MER,billion US$2010/yr,1\n");
  const auto r = suggest_pairs(store);
  EXPECT_TRUE(r.suggestions.empty());
  ASSERT_EQ(r.report.size(), 1u);
  EXPECT_NE(r.report.front().find("SOLO"), std::string::npos);
}

TEST(Suggest, NoBaselineCandidateReported) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "M,Tax1,World,GDP|MER,billion US$2010/yr,1\n"
      "M,Tax2,World,GDP|MER,billion US$2010/yr,1\n");
  const auto r = suggest_pairs(store);
  EXPECT_TRUE(r.suggestions.empty());
  ASSERT_EQ(r.report.size(), 1u);
}

TEST(Suggest, TieBrokenLexicographicallyAndFlagged) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "M,X-NPi,World,GDP|MER,billion US$2010/yr,1\n"
      "M,X-Base,World,GDP|MER,billion US$2010/yr,1\n"
      "M,X-Tax,World,GDP|MER,billion US$2010/yr,1\n");
  const auto r = suggest_pairs(store);
  ASSERT_EQ(r.suggestions.size(), 1u);
  EXPECT_EQ(r.suggestions.front().baseline, "X-Base");
  EXPECT_TRUE(r.suggestions.front().tie);
  std::ostringstream os;
  write_suggestions(os, r);
  EXPECT_NE(os.str().find("# tie"), std::string::npos);
  // the output is itself a valid pair map
  std::istringstream back(os.str());
  EXPECT_EQ(PairMap::parse(back).entries().size(), 1u);
}

TEST(Suggest, MarkersAreWholeTokens) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "M,SSP2-noPolicy,World,GDP|MER,billion US$2010/yr,1\n"
      "M,Referendum,World,GDP|MER,billion US$2010/yr,1\n"
      "M,SSP2-Baseball,World,GDP|MER,billion US$2010/yr,1\n");
  const auto r = suggest_pairs(store);
  ASSERT_EQ(r.suggestions.size(), 2u);
  for (const auto& s : r.suggestions) EXPECT_EQ(s.baseline, "SSP2-noPolicy");
}

TEST(PairMapFile, DuplicatePolicyRejected) {
  EXPECT_THROW(map_of("M,P,B\nM,P,B2\n"), DataError);
  EXPECT_NO_THROW(map_of("M,P,B\nN,P,B\n"));
}

TEST(PairMapFile, CommentsAndHeader) {
  const auto m = map_of("# note\nmodel,policy_scenario,baseline_scenario\nM,P,B\n# tail\n");
  ASSERT_EQ(m.entries().size(), 1u);
  EXPECT_EQ(m.entries().front(), (PairEntry{"M", "P", "B"}));
}

TEST(ApplyPairMap, OnePairPerSharedRegion) {
  const auto map = PairMap::load(oracle::fixture("fixture_pairs.csv"));
  const auto r = apply_pair_map(fixture_store(), map);
  EXPECT_EQ(r.pairs.size(), 18u);  // 9 entries x 2 regions
  EXPECT_TRUE(r.issues.empty());
}

TEST(ApplyPairMap, MissingBaselineRegionDropsThatPair) {
  const auto store = load_text(
      "Model,Scenario,Region,Variable,Unit,2030\n"
      "M,Base,R1,GDP|MER,billion US$2010/yr,1\n"
      "M,Pol,World,GDP|MER,billion US$2010/yr,1\n"
      "M,Pol,R1,GDP|MER,billion US$2010/yr,1\n");
  const auto r = apply_pair_map(store, map_of("M,Pol,Base\n"));
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs.front().region(), "R1");
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_NE(r.issues.front().find("World"), std::string::npos);
}

TEST(ApplyPairMap, DanglingEntriesAreReportedNotFatal) {
  const auto r = apply_pair_map(fixture_store(), map_of("ALPHA,SSP2-Tax50,SSP2-Baseline\nALPHA,Nope,SSP2-Baseline\n"
                                                        "ALPHA,SSP2-Tax100,Missing\n"));
  EXPECT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.issues.size(), 2u);
}

TEST(ApplyPairMap, NoPairsIsHardError) {
  EXPECT_THROW(apply_pair_map(fixture_store(), map_of("ALPHA,Nope,SSP2-Baseline\n")), DataError);
}

TEST(ApplyPairMapProperty, CountIndependentOfEntryOrder) {
  auto entries = PairMap::load(oracle::fixture("fixture_pairs.csv")).entries();
  entries.push_back({"ALPHA", "Ghost", "SSP2-Baseline"});
  std::mt19937 rng(3);
  const auto ref = apply_pair_map(fixture_store(), PairMap(entries));
  for (int i = 0; i < 10; ++i) {
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto r = apply_pair_map(fixture_store(), PairMap(entries));
    ASSERT_EQ(r.pairs.size(), ref.pairs.size());
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      EXPECT_EQ(r.pairs[k].policy_key(), ref.pairs[k].policy_key());
    }
  }
}

TEST(RelativeReduction, Arithmetic) {
  auto reduction = [](double b, double p) {
    const auto store = two_sided(b, p);
    const PairedScenario pair(store, "M", "World", "Pol", "Base");
    return relative_reduction(pair, Variable::GrossCO2Emissions, 2030);
  };
  EXPECT_EQ(*reduction(100, 80), 20.0);
  EXPECT_EQ(*reduction(35000, 1750), 95.0);
  EXPECT_NEAR(*reduction(35000, 36000), -2.857142857142857, 1e-12);
  EXPECT_EQ(reduction(0, 5).issue().kind, IssueKind::DegenerateBaseline);
}

TEST(RelativeReduction, MissingEitherSide) {
  const auto store = two_sided(100, 80);
  const PairedScenario pair(store, "M", "World", "Pol", "Base");
  EXPECT_EQ(relative_reduction(pair, Variable::GrossCO2Emissions, 2040).issue().kind,
            IssueKind::MissingObservation);
  EXPECT_EQ(relative_reduction(pair, Variable::GDP, 2030).issue().kind, IssueKind::MissingObservation);
}

TEST(RelativeReductionProperty, IdenticalSidesAndScaleInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(1.0, 1e5), scale(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double b = val(rng), p = val(rng), k = scale(rng);
    const auto same = two_sided(b, b);
    EXPECT_EQ(*relative_reduction(PairedScenario(same, "M", "World", "Pol", "Base"),
                                  Variable::GrossCO2Emissions, 2030),
              0.0);
    const auto s1 = two_sided(b, p);
    const auto s2 = two_sided(b * k, p * k);
    const double r1 = *relative_reduction(PairedScenario(s1, "M", "World", "Pol", "Base"),
                                          Variable::GrossCO2Emissions, 2030);
    const double r2 = *relative_reduction(PairedScenario(s2, "M", "World", "Pol", "Base"),
                                          Variable::GrossCO2Emissions, 2030);
    EXPECT_NEAR(r1, r2, 1e-9 * std::max(1.0, std::abs(r1)));
  }
}
