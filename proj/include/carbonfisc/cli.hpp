#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "carbonfisc/efficacy.hpp"
#include "carbonfisc/fiscal.hpp"
#include "carbonfisc/leviathan.hpp"
#include "carbonfisc/pairing.hpp"
#include "carbonfisc/report.hpp"
#include "carbonfisc/scenario_store.hpp"
#include "carbonfisc/skill.hpp"
#include "carbonfisc/wdi_store.hpp"

#ifndef CARBONFISC_DATA_DIR
#define CARBONFISC_DATA_DIR "data"
#endif

namespace carbonfisc::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kInternal = 4 };

inline constexpr const char* kConfigDirEnv = "CARBONFISC_CONFIG_DIR";

struct RunConfig {
  std::string subcommand;
  std::optional<fs::path> scenario_db;
  std::optional<fs::path> mapping;
  std::optional<fs::path> pair_map;
  std::optional<fs::path> wdi_tax, wdi_ghg, wdi_gdp;
  std::optional<fs::path> estimates;
  std::optional<fs::path> models;
  std::optional<fs::path> region_order;
  std::string tax_code = "GC.TAX.TOTL.GD.ZS";
  std::string ghg_code;
  std::string gdp_code;
  std::optional<int> year;
  int efficacy_year = kEfficacyYear;
  int fiscal_year = kFiscalYear;
  int wdi_year = 2019;
  double threshold = kStringencyThreshold;
  std::string efficacy = "0.0013";
  double outlier_limit = kOutlierSharePct;
  std::string convention = "density";
  std::string model, scenario, baseline;
  bool keep_model_versions = false;
  fs::path out = "out";

  double efficacy_value = kDefaultEfficacy;
  bool efficacy_from_pool = false;

  // Fills defaults from the config directory and checks ranges and paths.
  void resolve_and_validate() {
    if (const char* dir = std::getenv(kConfigDirEnv)) {
      const fs::path base(dir);
      if (!mapping && fs::exists(base / "variable_mapping.txt")) mapping = base / "variable_mapping.txt";
      if (!estimates && fs::exists(base / "external_estimates.csv")) estimates = base / "external_estimates.csv";
    }
    if (!estimates) {
      const fs::path bundled = fs::path(CARBONFISC_DATA_DIR) / "external_estimates.csv";
      if (fs::exists(bundled)) estimates = bundled;
    }
    for (const auto* p : {&scenario_db, &mapping, &pair_map, &wdi_tax, &wdi_ghg, &wdi_gdp, &estimates,
                          &models, &region_order}) {
      if (*p && !fs::exists(**p)) throw ConfigError("input path does not exist: " + (*p)->string());
    }
    if (!(threshold > 0.0 && threshold <= 100.0)) throw ConfigError("--threshold must lie in (0, 100]");
    if (!(outlier_limit > 0.0)) throw ConfigError("--outlier-limit must be positive");
    if (efficacy == "pooled") {
      efficacy_from_pool = true;
    } else {
      const auto v = csv::parse_double(efficacy);
      if (!v || !(*v >= 0.0 && *v < 1.0)) throw ConfigError("--efficacy must be 'pooled' or lie in [0, 1)");
      efficacy_value = *v;
    }
    if (convention != "density" && convention != "convolved") {
      throw ConfigError("--convention must be 'density' or 'convolved'");
    }
    if (year) {
      if (subcommand == "all") throw ConfigError("--year is ambiguous for 'all'; use --efficacy-year, --fiscal-year or --wdi-year");
      if (subcommand == "efficacy" || subcommand == "skill") efficacy_year = *year;
      if (subcommand == "leviathan") wdi_year = *year;
      if (subcommand == "fiscal-table" || subcommand == "regional-panel" || subcommand == "sweep") fiscal_year = *year;
    }
  }

  LikelihoodConvention likelihood() const {
    return convention == "convolved" ? LikelihoodConvention::Convolved
                                     : LikelihoodConvention::DensityAtModelMean;
  }

  // Configuration echo for the manifest. The output directory is left out so
  // that reruns into different directories share a manifest hash.
  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    auto path = [](const std::optional<fs::path>& p) {
      return p ? nlohmann::ordered_json(p->string()) : nlohmann::ordered_json(nullptr);
    };
    j["scenario_db"] = path(scenario_db);
    j["mapping"] = path(mapping);
    j["pair_map"] = path(pair_map);
    j["wdi_tax"] = path(wdi_tax);
    j["wdi_ghg"] = path(wdi_ghg);
    j["wdi_gdp"] = path(wdi_gdp);
    j["estimates"] = path(estimates);
    j["models"] = path(models);
    j["region_order"] = path(region_order);
    j["indicator_codes"] = {{"tax", tax_code}, {"ghg", ghg_code}, {"gdp", gdp_code}};
    j["efficacy_year"] = efficacy_year;
    j["fiscal_year"] = fiscal_year;
    j["wdi_year"] = wdi_year;
    j["threshold_pct"] = threshold;
    j["efficacy"] = efficacy;
    j["outlier_limit_pct"] = outlier_limit;
    j["likelihood_convention"] = to_string(likelihood());
    j["model"] = model;
    j["scenario"] = scenario;
    j["baseline"] = baseline;
    j["keep_model_versions"] = keep_model_versions;
    return j;
  }
};

// Loads inputs on first use and runs the pipeline stages.
class Pipeline {
 public:
  Pipeline(RunConfig config, std::ostream& log)
      : cfg_(std::move(config)), log_(log), manifest_(cfg_.subcommand, cfg_.echo()) {
    auto add = [&](const char* role, const std::optional<fs::path>& p) {
      if (p) manifest_.add_input(role, *p);
    };
    add("scenario_db", cfg_.scenario_db);
    add("mapping", cfg_.mapping);
    add("pair_map", cfg_.pair_map);
    add("wdi_tax", cfg_.wdi_tax);
    add("wdi_ghg", cfg_.wdi_ghg);
    add("wdi_gdp", cfg_.wdi_gdp);
    add("estimates", cfg_.estimates);
    add("models", cfg_.models);
    add("region_order", cfg_.region_order);
    writer_ = std::make_unique<ArtifactWriter>(cfg_.out, manifest_);
  }

  void ingest() {
    const auto& s = store();
    std::ostringstream os;
    export_scenario_store(s, os);
    writer_->write_csv("scenario_store.csv", os.str());
    log_ << "ingest: " << s.list_models().size() << " models, " << s.series_count() << " series\n";
  }

  void pair_suggest() {
    const auto result = suggest_pairs(store());
    std::ostringstream os;
    write_suggestions(os, result);
    writer_->write_csv("pair_suggestions.csv", os.str());
    writer_->write_text("pair_suggestions_report.txt", table::lines(result.report));
    log_ << "pair-suggest: " << result.suggestions.size() << " suggestions\n";
  }

  const std::vector<ModelEfficacy>& efficacy() {
    if (model_efficacy_) return *model_efficacy_;
    const auto run = compute_efficacy(pairs(), cfg_.efficacy_year);
    model_efficacy_ = model_efficacy(run.observations);
    writer_->write_csv("efficacy_observations.csv", table::efficacy_observations(run));
    writer_->write_csv("efficacy_exclusions.csv", table::exclusions(run.exclusions));
    writer_->write_csv("model_efficacy.csv", table::model_efficacy(*model_efficacy_));
    log_ << "efficacy: " << run.observations.size() << " observations, " << model_efficacy_->size()
         << " models\n";
    return *model_efficacy_;
  }

  const PooledEstimate& pooled() {
    if (pooled_) return *pooled_;
    if (!cfg_.estimates) throw ConfigError("no estimates file: pass --estimates");
    const auto estimates = load_estimates(*cfg_.estimates);
    pooled_ = pool_estimates(estimates);
    return *pooled_;
  }

  void skill() {
    const auto& pool = pooled();
    nlohmann::ordered_json j;
    j["pooled"] = {{"mean_pct_per_usd", pool.mean}, {"se_pct_per_usd", pool.standard_error}};
    j["weights"] = pool.weights;
    j["full_decarbonization_tax_usd_per_tco2"] = full_decarbonization_tax(pool);
    j["likelihood_convention"] = to_string(cfg_.likelihood());
    std::vector<ModelEfficacy> models;
    if (cfg_.models) {
      models = load_model_efficacy(*cfg_.models);
    } else if (cfg_.scenario_db && cfg_.pair_map) {
      models = efficacy();
    }
    if (!models.empty()) {
      const auto post = posterior_model_probabilities(models, pool, cfg_.likelihood());
      writer_->write_csv("posterior.csv", table::posterior(post));
      nlohmann::ordered_json p;
      for (const auto& [m, prob] : post.probabilities) p[m] = prob;
      j["posterior"] = std::move(p);
    } else {
      j["posterior"] = nullptr;
    }
    writer_->write_json("skill_summary.json", j);
    log_ << "skill: pooled " << pool.mean << " (se " << pool.standard_error << "), full decarbonization tax "
         << full_decarbonization_tax(pool) << " $/tCO2\n";
  }

  void leviathan() {
    if (!cfg_.wdi_tax || !cfg_.wdi_ghg || !cfg_.wdi_gdp) {
      throw ConfigError("leviathan needs --wdi-tax, --wdi-ghg and --wdi-gdp");
    }
    const IndicatorCodes codes{cfg_.tax_code, cfg_.ghg_code, cfg_.gdp_code};
    const auto panel = load_indicator_panel({*cfg_.wdi_tax, *cfg_.wdi_ghg, *cfg_.wdi_gdp}, codes);
    const double eps = cfg_.efficacy_from_pool ? pooled().mean / 100.0 : cfg_.efficacy_value;
    const auto curve = leviathan_curve(panel, cfg_.wdi_year, eps);
    writer_->write_csv("leviathan_curve.csv", table::leviathan(curve));
    const auto agg = global_aggregate(panel, cfg_.wdi_year);
    const auto coverage = panel.coverage(cfg_.wdi_year);
    const double global_t0 = short_run_leviathan(agg.revenue_share, agg.emission_intensity);
    const auto global_long = long_run_leviathan(global_t0, eps);
    nlohmann::ordered_json j;
    j["year"] = cfg_.wdi_year;
    j["efficacy_fraction_per_usd"] = eps;
    j["countries"] = curve.size();
    j["global_short_run"] = global_t0;
    j["global_long_run"] = global_long.feasible() ? nlohmann::ordered_json(*global_long.tax)
                                                  : nlohmann::ordered_json("INF");
    j["min_short_run"] = {{"country", curve.front().country}, {"tax", curve.front().short_run_tax}};
    j["max_short_run"] = {{"country", curve.back().country}, {"tax", curve.back().short_run_tax}};
    nlohmann::ordered_json missing = nlohmann::ordered_json::object();
    for (const auto& c : coverage.incomplete) missing[c.country] = c.reason;
    j["incomplete_countries"] = std::move(missing);
    j["row_errors"] = coverage.row_errors.size();
    writer_->write_json("leviathan_summary.json", j);
    log_ << "leviathan: " << curve.size() << " countries, global short-run " << global_t0 << " $/tCO2eq\n";
  }

  void fiscal_table() {
    const auto scenarios = stringent_scenarios(pairs(), cfg_.fiscal_year, cfg_.threshold, cfg_.outlier_limit);
    const auto table = stringent_model_table(pairs(), cfg_.fiscal_year, cfg_.threshold, cfg_.outlier_limit);
    writer_->write_csv("fiscal_scenarios.csv", table::fiscal(scenarios.rows));
    writer_->write_csv("fiscal_table.csv", table::fiscal(table.rows));
    writer_->write_text("fiscal_table_diagnostics.txt", table::lines(table.diagnostics));
    log_ << "fiscal-table: " << table.rows.size() << " models at >= " << cfg_.threshold << "%\n";
  }

  void regional_panel() {
    if (cfg_.model.empty() || cfg_.scenario.empty()) {
      throw ConfigError("regional-panel needs --model and --scenario");
    }
    std::string baseline = cfg_.baseline;
    if (baseline.empty() && cfg_.pair_map) {
      for (const auto& e : PairMap::load(*cfg_.pair_map).entries())
        if (e.model == cfg_.model && e.policy == cfg_.scenario) baseline = e.baseline;
    }
    if (baseline.empty()) throw ConfigError("regional-panel needs --baseline or a pair map entry");
    std::vector<std::string> order;
    if (cfg_.region_order) {
      std::istringstream in(read_file(*cfg_.region_order));
      std::string line;
      while (std::getline(in, line)) {
        const auto t = csv::trim(line);
        if (!t.empty() && t.front() != '#') order.emplace_back(t);
      }
    }
    const auto panel = carbonfisc::regional_panel(store(), cfg_.model, cfg_.scenario, baseline,
                                                  default_panel_years(), order, cfg_.outlier_limit);
    writer_->write_csv("regional_panel.csv", table::fiscal(panel.rows));
    writer_->write_text("regional_panel_diagnostics.txt", table::lines(panel.diagnostics));
    log_ << "regional-panel: " << panel.rows.size() << " rows\n";
  }

  void sweep() {
    std::vector<std::string> models;
    if (!cfg_.model.empty()) {
      models.push_back(cfg_.model);
    } else {
      for (const auto& p : pairs())
        if (models.empty() || models.back() != p.model()) models.push_back(p.model());
    }
    std::ostringstream os;
    table::sweep_header(os);
    std::vector<std::string> diagnostics;
    for (const auto& m : models) {
      const auto s = stringency_sweep(pairs(), m, cfg_.fiscal_year);
      table::sweep_rows(os, m, s);
      diagnostics.insert(diagnostics.end(), s.diagnostics.begin(), s.diagnostics.end());
    }
    writer_->write_csv("sweep.csv", os.str());
    writer_->write_text("sweep_diagnostics.txt", table::lines(diagnostics));
    log_ << "sweep: " << models.size() << " models\n";
  }

  void all() {
    if (cfg_.scenario_db) {
      ingest();
      pair_suggest();
      if (cfg_.pair_map) {
        efficacy();
        fiscal_table();
        sweep();
        if (!cfg_.model.empty() && !cfg_.scenario.empty()) regional_panel();
      }
    }
    if (cfg_.estimates) skill();
    if (cfg_.wdi_tax && cfg_.wdi_ghg && cfg_.wdi_gdp) leviathan();
  }

  fs::path finish() { return writer_->finish(); }

  const std::optional<fs::path>& load_report_path() const { return load_report_path_; }

 private:
  const ScenarioStore& store() {
    if (store_) return *store_;
    if (!cfg_.scenario_db) throw ConfigError(cfg_.subcommand + " needs --scenario-db");
    auto mapping = cfg_.mapping ? VariableMapping::load(*cfg_.mapping) : VariableMapping::defaults();
    if (cfg_.keep_model_versions) mapping.set_canonicalize_models(false);
    auto loaded = load_scenario_database(*cfg_.scenario_db, mapping);
    load_report_path_ = writer_->write_text("load_report.txt", loaded.report.to_text());
    writer_->write_json("load_report.json", loaded.report.to_json());
    if (!loaded.report.conserved()) throw InvariantError("load report does not conserve rows");
    store_ = std::move(loaded.store);
    return *store_;
  }

  const std::vector<PairedScenario>& pairs() {
    if (pairs_) return pairs_->pairs;
    if (!cfg_.pair_map) throw ConfigError(cfg_.subcommand + " needs --pair-map");
    const auto& s = store();
    pairs_ = apply_pair_map(s, PairMap::load(*cfg_.pair_map));
    writer_->write_text("pairing_issues.txt", table::lines(pairs_->issues));
    return pairs_->pairs;
  }

  RunConfig cfg_;
  std::ostream& log_;
  RunManifest manifest_;
  std::unique_ptr<ArtifactWriter> writer_;
  std::optional<ScenarioStore> store_;
  std::optional<PairingResult> pairs_;
  std::optional<std::vector<ModelEfficacy>> model_efficacy_;
  std::optional<PooledEstimate> pooled_;
  std::optional<fs::path> load_report_path_;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"ingest", "pair-suggest", "efficacy", "skill", "leviathan",
                                              "fiscal-table", "regional-panel", "sweep", "all"};
  return names;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Fiscal implications of stringent climate policy from scenario databases and country panels",
               "carbonfisc"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kToolVersion));
  app.footer(std::string("Environment: ") + kConfigDirEnv +
             " names a directory holding default variable_mapping.txt and external_estimates.csv.");

  auto path_opt = [&](const char* flag, std::optional<fs::path>& target, const char* help) {
    app.add_option_function<std::string>(flag, [&target](const std::string& v) { target = fs::path(v); }, help);
  };
  path_opt("--scenario-db", cfg.scenario_db, "IAMC wide-format scenario CSV");
  path_opt("--mapping", cfg.mapping, "variable mapping config (default: built-in)");
  path_opt("--pair-map", cfg.pair_map, "policy/baseline pair map CSV");
  path_opt("--wdi-tax", cfg.wdi_tax, "long-format tax revenue (% of GDP) indicator file");
  path_opt("--wdi-ghg", cfg.wdi_ghg, "long-format GHG emissions (kt CO2eq) indicator file");
  path_opt("--wdi-gdp", cfg.wdi_gdp, "long-format GDP (current US$) indicator file");
  path_opt("--estimates", cfg.estimates, "external efficacy estimates CSV (default: bundled)");
  path_opt("--models", cfg.models, "model efficacy CSV model,n,mean,se (skill without a scenario db)");
  path_opt("--region-order", cfg.region_order, "region ordering for the regional panel, one per line");
  app.add_option("--tax-code", cfg.tax_code, "tax revenue indicator code")->capture_default_str();
  app.add_option("--ghg-code", cfg.ghg_code, "emissions indicator code");
  app.add_option("--gdp-code", cfg.gdp_code, "GDP indicator code");
  app.add_option_function<int>("--year", [&cfg](int y) { cfg.year = y; },
                               "reference year of the chosen subcommand");
  app.add_option("--efficacy-year", cfg.efficacy_year, "tax efficacy reference year")->capture_default_str();
  app.add_option("--fiscal-year", cfg.fiscal_year, "fiscal table, panel and sweep year")->capture_default_str();
  app.add_option("--wdi-year", cfg.wdi_year, "Leviathan snapshot year")->capture_default_str();
  app.add_option("--threshold", cfg.threshold, "stringency threshold, % reduction in (0, 100]")
      ->capture_default_str();
  app.add_option("--efficacy", cfg.efficacy, "long-run efficacy per US$/t in [0, 1), or 'pooled'")
      ->capture_default_str();
  app.add_option("--outlier-limit", cfg.outlier_limit, "flag shares above this % of GDP")->capture_default_str();
  app.add_option("--convention", cfg.convention, "posterior likelihood: density | convolved")
      ->capture_default_str();
  app.add_option("--model", cfg.model, "model for regional-panel and sweep");
  app.add_option("--scenario", cfg.scenario, "policy scenario for regional-panel");
  app.add_option("--baseline", cfg.baseline, "baseline scenario for regional-panel");
  app.add_flag("--keep-model-versions", cfg.keep_model_versions, "do not strip version suffixes");
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();

  for (const auto& name : subcommands()) app.add_subcommand(name)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  std::optional<Pipeline> pipeline;
  try {
    cfg.resolve_and_validate();
    pipeline.emplace(cfg, out);
    const auto& sub = cfg.subcommand;
    if (sub == "ingest") pipeline->ingest();
    else if (sub == "pair-suggest") pipeline->pair_suggest();
    else if (sub == "efficacy") pipeline->efficacy();
    else if (sub == "skill") pipeline->skill();
    else if (sub == "leviathan") pipeline->leviathan();
    else if (sub == "fiscal-table") pipeline->fiscal_table();
    else if (sub == "regional-panel") pipeline->regional_panel();
    else if (sub == "sweep") pipeline->sweep();
    else pipeline->all();
    pipeline->finish();
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    if (pipeline && pipeline->load_report_path()) err << "load report: " << pipeline->load_report_path()->string() << '\n';
    return kData;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace carbonfisc::cli
