#include "codebench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace codebench::stats {

Sample Sample::unweighted(std::vector<double> values) {
  Sample s;
  s.weights.assign(values.size(), 1.0);
  s.values = std::move(values);
  return s;
}

void Sample::validate() const {
  if (values.size() != weights.size()) {
    throw Error(ErrorCode::invalid_argument, "sample values and weights differ in length");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::invalid_argument, "sample weights must be positive and finite");
    }
    if (!(values[i] >= kGridMin && values[i] <= kGridMax)) {
      throw Error(ErrorCode::invalid_argument, "sample values must lie in [1, 10]");
    }
  }
}

const std::vector<double>& grid() {
  static const std::vector<double> points = [] {
    std::vector<double> g(kGridPoints);
    for (std::size_t j = 0; j < kGridPoints; ++j) {
      g[j] = kGridMin + (kGridMax - kGridMin) * static_cast<double>(j) / static_cast<double>(kGridPoints - 1);
    }
    return g;
  }();
  return points;
}

double weighted_percentile(std::span<const double> values, std::span<const double> weights, double p) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::invalid_argument, "weighted_percentile needs a non-empty sample");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (auto i : order) total += weights[i];
  double cumulative = 0.0;
  for (auto i : order) {
    cumulative += weights[i];
    if (cumulative / total >= p) return values[i];
  }
  return values[order.back()];
}

double weighted_percentile(const Sample& sample, double p) {
  return weighted_percentile(sample.values, sample.weights, p);
}

double silverman_bandwidth(const Sample& sample) {
  double total = 0.0;
  double total_sq = 0.0;
  for (double w : sample.weights) {
    total += w;
    total_sq += w * w;
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) mean += sample.weights[i] / total * sample.values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double d = sample.values[i] - mean;
    var += sample.weights[i] / total * d * d;
  }
  double sd = std::sqrt(var);
  double iqr = weighted_percentile(sample, 0.75) - weighted_percentile(sample, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  double n_eff = total * total / total_sq;
  double h = 0.9 * spread * std::pow(n_eff, -0.2);
  return std::max(h, kMinBandwidth);
}

DensityCurve kde(const Sample& sample) {
  sample.validate();
  if (sample.empty()) {
    throw Error(ErrorCode::empty_segment, "empty segment");
  }
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);

  DensityCurve curve;
  curve.grid = grid();
  curve.n = sample.size();
  curve.bandwidth = silverman_bandwidth(sample);
  const double h = curve.bandwidth;

  double total = 0.0;
  for (double w : sample.weights) total += w;
  std::vector<double> norm(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) norm[i] = sample.weights[i] / total;

  curve.density.assign(kGridPoints, 0.0);
  for (std::size_t j = 0; j < kGridPoints; ++j) {
    const double x = curve.grid[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double u = (x - sample.values[i]) / h;
      acc += norm[i] * std::exp(-0.5 * u * u) * inv_sqrt_2pi / h;
    }
    curve.density[j] = acc;
  }
  curve.mass = trapezoid_mass(curve.grid, curve.density);
  return curve;
}

double find_mode(const DensityCurve& curve) {
  if (curve.density.empty() || curve.density.size() != curve.grid.size()) {
    throw Error(ErrorCode::invalid_argument, "density curve has no grid");
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < curve.density.size(); ++j) {
    if (curve.density[j] > curve.density[best]) best = j;
  }
  return curve.grid[best];
}

double trapezoid_mass(std::span<const double> grid, std::span<const double> density) {
  double mass = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    mass += 0.5 * (density[j] + density[j - 1]) * (grid[j] - grid[j - 1]);
  }
  return mass;
}

DensityCurve summarize(const Sample& sample) {
  if (sample.empty()) {
    throw Error(ErrorCode::empty_segment, "empty segment");
  }
  auto curve = kde(sample);
  curve.mode = find_mode(curve);
  curve.p10 = weighted_percentile(sample, 0.1);
  curve.p90 = weighted_percentile(sample, 0.9);
  return curve;
}

std::string density_table(const DensityCurve& curve) {
  std::string out;
  out.reserve(curve.grid.size() * 32);
  char line[64];
  for (std::size_t j = 0; j < curve.grid.size(); ++j) {
    std::snprintf(line, sizeof line, "%.6f\t%.9e\n", curve.grid[j], curve.density[j]);
    out += line;
  }
  return out;
}

}  // namespace codebench::stats
