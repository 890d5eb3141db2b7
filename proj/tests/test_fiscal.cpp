#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <set>

#include "carbonfisc/fiscal.hpp"
#include "oracles.hpp"

using namespace carbonfisc;

namespace {

struct Fixture {
  ScenarioStore store;
};

const Fixture& fixture() {
  static const Fixture f{
      load_scenario_database(oracle::fixture("fixture_scenarios.csv"), VariableMapping::defaults()).store};
  return f;
}

const std::vector<PairedScenario>& fixture_pairs() {
  static const PairingResult pairs =
      apply_pair_map(fixture().store, PairMap::load(oracle::fixture("fixture_pairs.csv")));
  return pairs.pairs;
}

}  // namespace

TEST(Shares, RevenueArithmetic) {
  EXPECT_EQ(revenue_share(100.0, 30000.0, 100000.0), 3.0);
  EXPECT_EQ(revenue_share(0.0, 30000.0, 100000.0), 0.0);
  EXPECT_THROW(revenue_share(100.0, 1.0, 0.0), DataError);
  EXPECT_THROW(revenue_share(100.0, 1.0, -5.0), DataError);
}

TEST(Shares, SubsidyArithmetic) {
  EXPECT_NEAR(subsidy_share(100.0, 6560.0, 10000.0), -6.56, 1e-12);
  EXPECT_EQ(subsidy_share(100.0, 0.0, 10000.0), 0.0);
  EXPECT_THROW(subsidy_share(100.0, -1.0, 10000.0), DataError);
}

TEST(SharesProperty, LinearAndHomogeneous) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> price(0.0, 5000.0), qty(0.0, 60000.0), gdp(1e3, 3e5), k(0.1, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double p = price(rng), q = qty(rng), g = gdp(rng), f = k(rng);
    // brute force in dollars: price * tonnes / (GDP in dollars)
    const double oracle_rev = 100.0 * (p * q * 1e6) / (g * 1e9);
    EXPECT_NEAR(revenue_share(p, q, g), oracle_rev, 1e-12 * std::max(1.0, oracle_rev));
    EXPECT_NEAR(revenue_share(f * p, q, g), f * revenue_share(p, q, g), 1e-12 * std::max(1.0, oracle_rev * f));
    EXPECT_NEAR(revenue_share(p, f * q, g), f * revenue_share(p, q, g), 1e-12 * std::max(1.0, oracle_rev * f));
    EXPECT_NEAR(revenue_share(2 * p, f * q, 2 * g), f * revenue_share(p, q, g),
                1e-12 * std::max(1.0, oracle_rev * f));
    EXPECT_GE(revenue_share(p, q, g), 0.0);
    EXPECT_LE(subsidy_share(p, q, g), 0.0);
    EXPECT_EQ(subsidy_share(0.0, q, g), 0.0);
    EXPECT_NEAR(subsidy_share(2 * p, f * q, 2 * g), f * subsidy_share(p, q, g),
                1e-12 * std::max(1.0, oracle_rev * f));
  }
}

TEST(StringentTable, FixtureRows) {
  const auto table = stringent_model_table(fixture_pairs());
  ASSERT_EQ(table.rows.size(), 2u);
  // BETA: one qualifying scenario (NDC-CP250, 96%)
  const auto& beta = table.rows[0];
  EXPECT_EQ(beta.model, "BETA");
  EXPECT_EQ(beta.scenarios, 1u);
  EXPECT_EQ(beta.carbon_price, 800.0);
  EXPECT_EQ(beta.revenue_share, 32.0 / 27.0);
  EXPECT_EQ(beta.subsidy_share, -32.0 / 9.0);
  EXPECT_EQ(*beta.reduction_from_baseline, 96.0);
  // ALPHA: SSP2-Tax100 (95%) and SSP2-Tax200 (98%)
  const auto& alpha = table.rows[1];
  EXPECT_EQ(alpha.model, "ALPHA");
  EXPECT_EQ(alpha.scenarios, 2u);
  EXPECT_EQ(alpha.carbon_price, 700.0);
  EXPECT_NEAR(alpha.revenue_share, (5.0 / 9.0 + 0.625) / 2.0, 1e-14);
  EXPECT_NEAR(alpha.subsidy_share, (-10.0 / 9.0 - 6.25) / 2.0, 1e-14);
  EXPECT_FALSE(alpha.outlier);
}

TEST(StringentTable, SingleQualifyingScenarioEqualsScenario) {
  const auto scenarios = stringent_scenarios(fixture_pairs());
  const auto table = stringent_model_table(fixture_pairs());
  for (const auto& s : scenarios.rows) {
    if (s.model != "BETA") continue;
    EXPECT_EQ(s.revenue_share, table.rows[0].revenue_share);
    EXPECT_EQ(s.subsidy_share, table.rows[0].subsidy_share);
  }
}

TEST(StringentTable, ImpossibleThresholdGivesEmptyTable) {
  const auto table = stringent_model_table(fixture_pairs(), 2050, 101.0);
  EXPECT_TRUE(table.rows.empty());
  EXPECT_FALSE(table.diagnostics.empty());
}

TEST(StringentTable, FilteringIsMonotone) {
  auto keys = [](const FiscalTable& t) {
    std::set<std::string> out;
    for (const auto& r : t.rows) out.insert(r.model + "/" + r.scenario);
    return out;
  };
  std::set<std::string> previous;
  bool first = true;
  for (double th = 100.0; th >= -10.0; th -= 0.5) {
    const auto current = keys(stringent_scenarios(fixture_pairs(), 2050, th));
    if (!first) {
      EXPECT_TRUE(std::includes(current.begin(), current.end(), previous.begin(), previous.end())) << th;
    }
    previous = current;
    first = false;
  }
}

TEST(StringentTable, OutlierAndNegativeRevenueFlags) {
  std::istringstream in(
      "Model,Scenario,Region,Variable,Unit,2050\n"
      "X,B,World,Emissions|CO2,Mt CO2/yr,1000\n"
      "X,P,World,Emissions|CO2,Mt CO2/yr,-10\n"
      "X,P,World,Price|Carbon,US$2010/t CO2,1000\n"
      "X,P,World,Carbon Sequestration|CCS,Mt CO2/yr,500000\n"
      "X,P,World,GDP|MER,billion US$2010/yr,100000\n");
  const auto store = load_scenario_database(in, VariableMapping::defaults()).store;
  const PairMap map({{"X", "P", "B"}});
  const auto pairs = apply_pair_map(store, map);
  const auto table = stringent_model_table(pairs.pairs);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_TRUE(table.rows[0].outlier);  // subsidy is -500% of GDP
  EXPECT_TRUE(table.rows[0].negative_revenue);
  EXPECT_EQ(table.rows[0].subsidy_share, -500.0);
  EXPECT_EQ(table.diagnostics.size(), 2u);
}

TEST(RegionalPanel, SharesPerRegionIndependently) {
  const auto panel = regional_panel(fixture().store, "ALPHA", "SSP2-Tax100", "SSP2-Baseline");
  // R5ASIA lacks GDP in 2040, so 5 of 6 rows
  ASSERT_EQ(panel.rows.size(), 5u);
  ASSERT_EQ(panel.diagnostics.size(), 1u);
  EXPECT_NE(panel.diagnostics[0].find("R5ASIA 2040"), std::string::npos);
  const auto& asia2030 = panel.rows[0];
  EXPECT_EQ(asia2030.region, "R5ASIA");
  EXPECT_EQ(asia2030.year, 2030);
  // 100 $/t * 12000 Mt over 29400 bn$; sequestration 40 + 20 Mt
  EXPECT_EQ(asia2030.revenue_share, 100.0 * 1.2e6 / 2.94e7);
  EXPECT_EQ(asia2030.subsidy_share, -100.0 * 6000.0 / 2.94e7);
  EXPECT_EQ(*asia2030.reduction_from_baseline, 25.0);
  const auto& world2050 = panel.rows.back();
  EXPECT_EQ(world2050.region, "World");
  EXPECT_EQ(world2050.year, 2050);
  EXPECT_EQ(world2050.revenue_share, 5.0 / 9.0);
  EXPECT_EQ(world2050.subsidy_share, -10.0 / 9.0);
}

TEST(RegionalPanel, SuppliedOrderWins) {
  const auto panel = regional_panel(fixture().store, "ALPHA", "SSP2-Tax100", "SSP2-Baseline", {2030},
                                    {"World", "R5ASIA"});
  ASSERT_EQ(panel.rows.size(), 2u);
  EXPECT_EQ(panel.rows[0].region, "World");
  EXPECT_EQ(panel.rows[1].region, "R5ASIA");
}

TEST(RegionalPanel, UnknownScenarioDiagnosed) {
  const auto panel = regional_panel(fixture().store, "ALPHA", "Nope", "SSP2-Baseline");
  EXPECT_TRUE(panel.rows.empty());
  EXPECT_EQ(panel.diagnostics.size(), 1u);
}

TEST(Sweep, SortedByReduction) {
  const auto sweep = stringency_sweep(fixture_pairs(), "ALPHA");
  ASSERT_EQ(sweep.points.size(), 3u);
  EXPECT_EQ(sweep.points[0].scenario, "SSP2-Tax50");
  EXPECT_EQ(*sweep.points[0].reduction_from_baseline, 50.0);
  EXPECT_EQ(*sweep.points[0].gdp_loss, 5.0);
  EXPECT_EQ(*sweep.points[0].sequestration, 1500.0);
  EXPECT_EQ(sweep.points[1].scenario, "SSP2-Tax100");
  EXPECT_EQ(sweep.points[2].scenario, "SSP2-Tax200");
  for (std::size_t i = 1; i < sweep.points.size(); ++i) {
    EXPECT_LE(*sweep.points[i - 1].reduction_from_baseline, *sweep.points[i].reduction_from_baseline);
    EXPECT_LE(*sweep.points[i - 1].carbon_price, *sweep.points[i].carbon_price);
  }
  EXPECT_TRUE(sweep.diagnostics.empty());
}

TEST(Sweep, BaselineEqualScenarioAndMissingFields) {
  const auto sweep = stringency_sweep(fixture_pairs(), "GAMMA");
  ASSERT_EQ(sweep.points.size(), 3u);
  EXPECT_EQ(sweep.points[0].scenario, "Neg");
  const auto& zero = sweep.points[1];
  EXPECT_EQ(zero.scenario, "ZeroPrice");
  EXPECT_EQ(*zero.reduction_from_baseline, 0.0);
  EXPECT_EQ(*zero.gdp_loss, 0.0);
  EXPECT_EQ(*zero.gross_emissions, 40000.0);
  EXPECT_FALSE(zero.sequestration.has_value());  // GAMMA reports no sequestration
  EXPECT_EQ(sweep.diagnostics.size(), 3u);
}
