#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbonfisc/csv.hpp"
#include "carbonfisc/efficacy.hpp"
#include "carbonfisc/fiscal.hpp"
#include "carbonfisc/hash.hpp"
#include "carbonfisc/leviathan.hpp"
#include "carbonfisc/skill.hpp"

namespace carbonfisc {

inline constexpr const char* kToolName = "carbonfisc";
inline constexpr const char* kToolVersion = "0.1.0";

namespace fs = std::filesystem;

// Provenance record for one CLI invocation. The hash covers tool version,
// subcommand, configuration and input content hashes; it is stamped into
// every artifact of the run.
class RunManifest {
 public:
  RunManifest(std::string subcommand, nlohmann::ordered_json config)
      : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

  void add_input(const std::string& role, const fs::path& path) {
    inputs_.push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
  }

  std::string hash() const { return sha256_hex(hashed_part().dump()); }

  void add_artifact(const fs::path& path, const std::string& sha) {
    artifacts_.push_back({{"file", path.filename().string()}, {"sha256", sha}});
  }

  nlohmann::ordered_json to_json(bool with_timestamp = true) const {
    auto j = hashed_part();
    j["manifest_hash"] = hash();
    j["artifacts"] = artifacts_;
    if (with_timestamp) j["created_utc"] = utc_now();
    return j;
  }

 private:
  nlohmann::ordered_json hashed_part() const {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    return j;
  }

  static std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string subcommand_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json artifacts_ = nlohmann::ordered_json::array();
};

// Writes artifacts into the output directory and registers them with the
// manifest. CSV artifacts open with a `# manifest_hash:` comment line.
class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {
    fs::create_directories(dir_);
  }

  fs::path write_csv(const std::string& name, const std::string& body) {
    return write(name, "# manifest_hash: " + manifest_.hash() + "\n" + body);
  }

  fs::path write_json(const std::string& name, nlohmann::ordered_json j) {
    j["manifest_hash"] = manifest_.hash();
    return write(name, j.dump(2) + "\n");
  }

  fs::path write_text(const std::string& name, const std::string& body) {
    return write(name, "manifest_hash: " + manifest_.hash() + "\n" + body);
  }

  fs::path finish() {
    const auto path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << manifest_.to_json().dump(2) << '\n';
    if (!out) throw DataError("cannot write " + path.string());
    return path;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + path.string());
    manifest_.add_artifact(path, sha256_hex(content));
    return path;
  }

  fs::path dir_;
  RunManifest& manifest_;
};

namespace table {

using csv::format_double;

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string model_efficacy(const std::vector<ModelEfficacy>& rows) {
  std::ostringstream os;
  os << "model,n,mean,se\n";
  for (const auto& r : rows) {
    csv::write_row(os, {r.model, std::to_string(r.n), format_double(r.mean), format_double(r.standard_error)});
  }
  return os.str();
}

inline std::string efficacy_observations(const EfficacyRun& run) {
  std::ostringstream os;
  os << "model,policy_scenario,region,year,reduction_pct,price,efficacy\n";
  for (const auto& o : run.observations) {
    csv::write_row(os, {o.model, o.policy, o.region, std::to_string(o.year), format_double(o.reduction_pct),
                        format_double(o.price), format_double(o.efficacy)});
  }
  return os.str();
}

inline std::string exclusions(const std::vector<Exclusion>& rows) {
  std::ostringstream os;
  os << "model,policy_scenario,reason\n";
  for (const auto& e : rows) csv::write_row(os, {e.model, e.policy, e.reason});
  return os.str();
}

inline std::string posterior(const ModelPosterior& p) {
  std::ostringstream os;
  os << "model,posterior_probability\n";
  for (const auto& [m, prob] : p.probabilities) csv::write_row(os, {m, format_double(prob)});
  return os.str();
}

inline std::string leviathan(const std::vector<LeviathanRecord>& rows) {
  std::ostringstream os;
  os << "country,short_run,long_run,emission_share,cumulative_share\n";
  for (const auto& r : rows) {
    csv::write_row(os, {r.country, format_double(r.short_run_tax),
                        r.long_run.feasible() ? format_double(*r.long_run.tax) : std::string("INF"),
                        format_double(r.emission_share), format_double(r.cumulative_emission_share)});
  }
  return os.str();
}

inline std::string fiscal(const std::vector<FiscalSummary>& rows) {
  std::ostringstream os;
  os << "model,scenario,region,year,scenarios,carbon_price,revenue_share_pct_gdp,subsidy_share_pct_gdp,"
        "reduction_from_baseline_pct,outlier,negative_revenue\n";
  for (const auto& r : rows) {
    csv::write_row(os, {r.model, r.scenario, r.region, std::to_string(r.year), std::to_string(r.scenarios),
                        format_double(r.carbon_price), format_double(r.revenue_share),
                        format_double(r.subsidy_share), opt(r.reduction_from_baseline),
                        r.outlier ? "1" : "0", r.negative_revenue ? "1" : "0"});
  }
  return os.str();
}

inline void sweep_header(std::ostream& os) {
  os << "model,scenario,reduction_from_baseline_pct,carbon_price,gdp_loss_pct,gross_emissions_mt,"
        "sequestration_mt\n";
}

inline void sweep_rows(std::ostream& os, const std::string& model, const Sweep& sweep) {
  for (const auto& p : sweep.points) {
    csv::write_row(os, {model, p.scenario, opt(p.reduction_from_baseline), opt(p.carbon_price),
                        opt(p.gdp_loss), opt(p.gross_emissions), opt(p.sequestration)});
  }
}

inline std::string lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

}  // namespace table

}  // namespace carbonfisc
