#pragma once

// Reference computations for the test suites. Each follows the textbook
// definition directly and shares no code with the library.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::string fixture(const std::string& name) {
  return (std::filesystem::path(CARBONFISC_FIXTURE_DIR) / name).string();
}

inline std::string bundled(const std::string& name) {
  return (std::filesystem::path(CARBONFISC_BUNDLED_DIR) / name).string();
}

// Two-pass sample mean and standard error of the mean.
inline std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

// Bisection for T in [0, 1/(2 eps)] with T (1 - eps T) = t0; the revenue
// curve is increasing on that interval.
inline double bisect_long_run(double t0, double eps) {
  double lo = 0.0, hi = 1.0 / (2.0 * eps);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * (1.0 - eps * mid) < t0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Posterior by direct density evaluation (no log space), for inputs where the
// densities do not underflow.
inline std::vector<double> direct_posterior(const std::vector<double>& means, double mu, double sd) {
  std::vector<double> dens;
  double total = 0.0;
  for (double m : means) {
    const double d = std::exp(-0.5 * (m - mu) * (m - mu) / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
    dens.push_back(d);
    total += d;
  }
  for (double& d : dens) d /= total;
  return dens;
}

}  // namespace oracle
