#pragma once

#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>

#include "carbonfisc/error.hpp"

namespace carbonfisc {

enum class Variable { CarbonPrice, GrossCO2Emissions, CO2Sequestration, GDP };

inline constexpr Variable kAllVariables[] = {Variable::CarbonPrice, Variable::GrossCO2Emissions,
                                             Variable::CO2Sequestration, Variable::GDP};

inline const char* to_string(Variable v) {
  switch (v) {
    case Variable::CarbonPrice: return "CarbonPrice";
    case Variable::GrossCO2Emissions: return "GrossCO2Emissions";
    case Variable::CO2Sequestration: return "CO2Sequestration";
    case Variable::GDP: return "GDP";
  }
  return "?";
}

inline std::optional<Variable> variable_from_string(std::string_view s) {
  for (Variable v : kAllVariables)
    if (s == to_string(v)) return v;
  return std::nullopt;
}

inline const char* canonical_unit(Variable v) {
  switch (v) {
    case Variable::CarbonPrice: return "US$2010/t CO2";
    case Variable::GrossCO2Emissions:
    case Variable::CO2Sequestration: return "Mt CO2/yr";
    case Variable::GDP: return "billion US$2010/yr";
  }
  return "?";
}

class UnitError : public DataError {
 public:
  using DataError::DataError;
};

namespace units {

// Mass of CO2 per mass of carbon.
inline constexpr double kCO2PerC = 44.0 / 12.0;

inline std::string squash(std::string_view unit) {
  std::string out;
  for (char c : unit) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

inline double mass_prefix(const std::string& p) {
  if (p == "kt") return 1e-3;
  if (p == "mt") return 1.0;
  return 1e3;  // gt
}

inline double money_prefix(const std::string& p) {
  if (p == "million") return 1e-3;
  if (p == "billion") return 1.0;
  return 1e3;  // trillion
}

}  // namespace units

// Multiplicative factor taking a value in `unit` to the canonical unit of `v`.
// Only scale prefixes and the carbon/CO2 mass ratio are handled. Any other
// currency base year would need a deflator and is rejected.
inline double conversion_factor(Variable v, std::string_view unit) {
  using namespace units;
  const std::string u = squash(unit);
  std::smatch m;
  static const std::regex currency_year(R"(us\$(\d{4}))");
  if (std::regex_search(u, m, currency_year) && m[1] != "2010") {
    throw UnitError("unit '" + std::string(unit) +
                    "' needs a currency deflator to reach US$2010; not supported");
  }
  switch (v) {
    case Variable::CarbonPrice: {
      static const std::regex re(R"(^us\$2010/t(co2|c)$)");
      if (std::regex_match(u, m, re)) return m[1] == "c" ? 1.0 / kCO2PerC : 1.0;
      break;
    }
    case Variable::GrossCO2Emissions:
    case Variable::CO2Sequestration: {
      static const std::regex re(R"(^(kt|mt|gt)(co2|c)/(yr|year|a)$)");
      if (std::regex_match(u, m, re)) {
        const double scale = mass_prefix(m[1]);
        return m[2] == "c" ? scale * kCO2PerC : scale;
      }
      break;
    }
    case Variable::GDP: {
      static const std::regex re(R"(^(million|billion|trillion)us\$2010/(yr|year|a)$)");
      if (std::regex_match(u, m, re)) return money_prefix(m[1]);
      break;
    }
  }
  throw UnitError("unit '" + std::string(unit) + "' cannot be converted to " +
                  canonical_unit(v) + " for " + to_string(v));
}

}  // namespace carbonfisc
