#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace logitcal {

struct BandwidthRule {
  enum class Kind { silverman, scott, fixed };

  Kind kind = Kind::silverman;
  double h = 0.0;  // only meaningful for Kind::fixed

  static BandwidthRule silverman() { return {Kind::silverman, 0.0}; }
  static BandwidthRule scott() { return {Kind::scott, 0.0}; }
  static BandwidthRule fixed(double h) { return {Kind::fixed, h}; }

  // "silverman", "scott" or "fixed:<h>"
  static BandwidthRule parse(const std::string& text);
  std::string to_string() const;
};

struct KdeConfig {
  BandwidthRule bandwidth = BandwidthRule::silverman();
  std::size_t grid_size = 512;
  // Grid extends this many bandwidths past the extreme samples. At 6 the
  // edge densities are small enough that trapezoid and plain-sum moments
  // agree to ~1e-10 of the span.
  double grid_pad = 6.0;
  double bandwidth_floor = 1e-6;

  // Throws ConfigError on grid_size < 16, negative pad, non-positive floor
  // or a non-positive fixed bandwidth.
  void validate() const;
};

// Gaussian KDE tabulated on a uniform grid. `cumulative` holds the running
// trapezoidal integral so CDF queries are O(1).
class DensityEstimate {
 public:
  DensityEstimate(std::vector<double> grid, std::vector<double> density,
                  double bandwidth, std::size_t sample_count);

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> density() const noexcept { return density_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }
  double bandwidth() const noexcept { return bandwidth_; }
  std::size_t sample_count() const noexcept { return sample_count_; }

  double lo() const noexcept { return grid_.front(); }
  double hi() const noexcept { return grid_.back(); }
  double span_width() const noexcept { return grid_.back() - grid_.front(); }
  double spacing() const noexcept { return spacing_; }

  // Piecewise-linear interpolation of the tabulated density; 0 off-grid.
  double value_at(double z) const noexcept;

 private:
  std::vector<double> grid_;
  std::vector<double> density_;
  std::vector<double> cumulative_;
  double bandwidth_;
  double spacing_;
  std::size_t sample_count_;
};

double standard_normal_pdf(double x) noexcept;
double standard_normal_cdf(double x) noexcept;

// Sample standard deviation with n-1 denominator; 0 for a single sample.
double sample_stddev(std::span<const double> samples);
// Type-7 (linear interpolation) quantile-based interquartile range.
double interquartile_range(std::span<const double> samples);

double select_bandwidth(std::span<const double> samples, const KdeConfig& config);

DensityEstimate estimate_density(std::span<const double> samples,
                                 const KdeConfig& config = {});

// Trapezoidal mass over grid ∩ (-inf, alpha], clamped to [0, 1].
double mass_below(const DensityEstimate& d, double alpha) noexcept;
double total_mass(const DensityEstimate& d) noexcept;

// Discrete centre of mass  sum_j p_j z_j / sum_j p_j.
double density_mean(const DensityEstimate& d);

// Two-column "z,p" CSV.
void write_density_csv(std::ostream& out, const DensityEstimate& d);

}  // namespace logitcal
