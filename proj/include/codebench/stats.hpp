#pragma once

#include <span>
#include <string>
#include <vector>

#include "codebench/common.hpp"

namespace codebench::stats {

inline constexpr std::size_t kGridPoints = 512;
inline constexpr double kGridMin = 1.0;
inline constexpr double kGridMax = 10.0;
inline constexpr double kGridStep = (kGridMax - kGridMin) / static_cast<double>(kGridPoints - 1);
inline constexpr double kMinBandwidth = 0.05;

// Values on the [1,10] health scale with strictly positive weights.
struct Sample {
  std::vector<double> values;
  std::vector<double> weights;

  static Sample unweighted(std::vector<double> values);
  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  // Throws Error(invalid_argument) on length mismatch, non-positive weight or out-of-range value.
  void validate() const;
};

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  double mode = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::size_t n = 0;
  double mass = 0.0;  // trapezoidal integral over the grid
};

const std::vector<double>& grid();

// Smallest value whose cumulative normalized weight reaches p (values sorted
// ascending, stable). Works for any finite values; requires a non-empty input.
double weighted_percentile(std::span<const double> values, std::span<const double> weights, double p);
double weighted_percentile(const Sample& sample, double p);

// 0.9 * min(sd_w, IQR_w / 1.34) * n_eff^(-1/5), floored at kMinBandwidth.
double silverman_bandwidth(const Sample& sample);

// Gaussian kernel density on the fixed grid. mode/p10/p90 are left unset.
DensityCurve kde(const Sample& sample);

// Grid point of maximum density; ties go to the smallest grid point.
double find_mode(const DensityCurve& curve);

double trapezoid_mass(std::span<const double> grid, std::span<const double> density);

// kde + find_mode + 10th/90th percentiles. Throws Error(empty_segment) on an empty sample.
DensityCurve summarize(const Sample& sample);

// Two-column "grid<TAB>density" table, one row per grid point.
std::string density_table(const DensityCurve& curve);

}  // namespace codebench::stats
