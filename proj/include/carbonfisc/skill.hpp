#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "carbonfisc/csv.hpp"
#include "carbonfisc/efficacy.hpp"
#include "carbonfisc/error.hpp"

namespace carbonfisc {

// An ex-post econometric estimate of tax efficacy, in %/(US$/tCO2).
struct ExternalEstimate {
  std::string label;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct PooledEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::map<std::string, double> weights;  // normalized, sums to 1
};

// How a model's mean efficacy is scored against the pooled estimate.
enum class LikelihoodConvention {
  // Normal density of the model mean under N(pooled mean, pooled se^2).
  DensityAtModelMean,
  // Same, with the model's own squared standard error added to the variance.
  Convolved,
};

inline const char* to_string(LikelihoodConvention c) {
  return c == LikelihoodConvention::DensityAtModelMean ? "density-at-model-mean" : "convolved";
}

struct ModelPosterior {
  std::vector<std::pair<std::string, double>> probabilities;  // input order
  LikelihoodConvention convention = LikelihoodConvention::DensityAtModelMean;

  double at(const std::string& model) const {
    for (const auto& [m, p] : probabilities)
      if (m == model) return p;
    throw std::out_of_range("no posterior for model " + model);
  }
};

// Inverse-variance weighted mean: w_i proportional to 1/se_i^2.
inline PooledEstimate pool_estimates(std::span<const ExternalEstimate> estimates) {
  if (estimates.empty()) throw DataError("pool_estimates: no estimates");
  double precision = 0.0;
  for (const auto& e : estimates) {
    if (!(e.standard_error > 0.0) || !std::isfinite(e.standard_error)) {
      throw DataError("estimate '" + e.label + "' has nonpositive standard error");
    }
    if (!std::isfinite(e.mean)) throw DataError("estimate '" + e.label + "' has non-finite mean");
    precision += 1.0 / (e.standard_error * e.standard_error);
  }
  PooledEstimate out;
  for (const auto& e : estimates) {
    const double w = 1.0 / (e.standard_error * e.standard_error) / precision;
    out.mean += w * e.mean;
    out.weights[e.label] += w;
  }
  out.standard_error = 1.0 / std::sqrt(precision);
  return out;
}

// Uniform prior over models; computed in log space and max-shifted.
inline ModelPosterior posterior_model_probabilities(
    std::span<const ModelEfficacy> models, const PooledEstimate& pooled,
    LikelihoodConvention convention = LikelihoodConvention::DensityAtModelMean) {
  if (models.empty()) throw DataError("posterior: no models");
  if (!(pooled.standard_error > 0.0)) throw DataError("posterior: pooled standard error must be positive");
  std::vector<double> log_lik;
  log_lik.reserve(models.size());
  for (const auto& m : models) {
    double var = pooled.standard_error * pooled.standard_error;
    if (convention == LikelihoodConvention::Convolved) var += m.standard_error * m.standard_error;
    const double z2 = (m.mean - pooled.mean) * (m.mean - pooled.mean) / var;
    log_lik.push_back(-0.5 * z2 - 0.5 * std::log(2.0 * std::numbers::pi * var));
  }
  const double top = *std::max_element(log_lik.begin(), log_lik.end());
  if (!std::isfinite(top)) throw DataError("posterior underflow: no model has a finite likelihood");
  double total = 0.0;
  for (double& l : log_lik) {
    l = std::isfinite(l) ? std::exp(l - top) : 0.0;
    total += l;
  }
  ModelPosterior out;
  out.convention = convention;
  for (std::size_t i = 0; i < models.size(); ++i)
    out.probabilities.emplace_back(models[i].model, log_lik[i] / total);
  return out;
}

// Tax that removes 100% of emissions if efficacy is linear in the tax.
inline double full_decarbonization_tax(const PooledEstimate& pooled) {
  if (!(pooled.mean > 0.0)) throw DataError("full decarbonization tax needs a positive pooled efficacy");
  return 100.0 / pooled.mean;
}

// CSV `label,mean_pct_per_usd,se_pct_per_usd`, header required.
inline std::vector<ExternalEstimate> parse_estimates(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  std::vector<ExternalEstimate> out;
  bool header = true;
  while (auto rec = reader.next()) {
    const auto& f = rec->fields;
    if (!f.empty() && !f[0].empty() && f[0].front() == '#') continue;
    if (header) {
      header = false;
      if (f.size() < 3 || detail::lower(f[0]) != "label") {
        throw DataError(source + ": expected header label,mean_pct_per_usd,se_pct_per_usd");
      }
      continue;
    }
    const auto mean = f.size() >= 3 ? csv::parse_double(f[1]) : std::nullopt;
    const auto se = f.size() >= 3 ? csv::parse_double(f[2]) : std::nullopt;
    if (!mean || !se) {
      throw DataError(source + " line " + std::to_string(rec->line) + ": malformed estimate row");
    }
    out.push_back({f[0], *mean, *se});
  }
  return out;
}

inline std::vector<ExternalEstimate> load_estimates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open estimates file " + path.string());
  return parse_estimates(in, path.string());
}

// CSV `model,n,mean,se` as written by the efficacy table.
inline std::vector<ModelEfficacy> parse_model_efficacy(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  std::vector<ModelEfficacy> out;
  bool header = true;
  while (auto rec = reader.next()) {
    const auto& f = rec->fields;
    if (!f.empty() && !f[0].empty() && f[0].front() == '#') continue;
    if (header) {
      header = false;
      if (f.empty() || detail::lower(f[0]) != "model") {
        throw DataError(source + ": expected header model,n,mean,se");
      }
      continue;
    }
    const auto n = f.size() >= 4 ? csv::parse_int(f[1]) : std::nullopt;
    const auto mean = f.size() >= 4 ? csv::parse_double(f[2]) : std::nullopt;
    const auto se = f.size() >= 4 ? csv::parse_double(f[3]) : std::nullopt;
    if (!n || *n < 1 || !mean || !se) {
      throw DataError(source + " line " + std::to_string(rec->line) + ": malformed model row");
    }
    out.push_back({f[0], static_cast<std::size_t>(*n), *mean, *se, *n == 1});
  }
  return out;
}

inline std::vector<ModelEfficacy> load_model_efficacy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model efficacy file " + path.string());
  return parse_model_efficacy(in, path.string());
}

}  // namespace carbonfisc
