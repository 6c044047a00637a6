#include "logitcal/kde.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "logitcal/errors.hpp"

namespace logitcal {

BandwidthRule BandwidthRule::parse(const std::string& text) {
  if (text == "silverman") return silverman();
  if (text == "scott") return scott();
  constexpr std::string_view prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string_view rest(text.data() + prefix.size(),
                                text.size() - prefix.size());
    double h = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), h);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() ||
        !std::isfinite(h) || h <= 0.0) {
      throw ConfigError("bad fixed bandwidth in '" + text + "'");
    }
    return fixed(h);
  }
  throw ConfigError("unknown bandwidth rule '" + text +
                    "' (expected silverman, scott or fixed:<h>)");
}

std::string BandwidthRule::to_string() const {
  switch (kind) {
    case Kind::silverman: return "silverman";
    case Kind::scott: return "scott";
    case Kind::fixed: {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, h);
      return "fixed:" + std::string(buf, ptr);
    }
  }
  return "silverman";
}

void KdeConfig::validate() const {
  if (grid_size < 16) throw ConfigError("grid_size must be at least 16");
  if (!(grid_pad >= 0.0)) throw ConfigError("grid_pad must be non-negative");
  if (!(bandwidth_floor > 0.0)) {
    throw ConfigError("bandwidth_floor must be positive");
  }
  if (bandwidth.kind == BandwidthRule::Kind::fixed &&
      !(bandwidth.h > 0.0 && std::isfinite(bandwidth.h))) {
    throw ConfigError("fixed bandwidth must be positive");
  }
}

DensityEstimate::DensityEstimate(std::vector<double> grid,
                                 std::vector<double> density, double bandwidth,
                                 std::size_t sample_count)
    : grid_(std::move(grid)),
      density_(std::move(density)),
      bandwidth_(bandwidth),
      sample_count_(sample_count) {
  if (grid_.size() < 2 || grid_.size() != density_.size()) {
    throw DegenerateInputError("density grid must have >= 2 matching points");
  }
  for (std::size_t j = 1; j < grid_.size(); ++j) {
    if (!(grid_[j] > grid_[j - 1])) {
      throw DegenerateInputError("density grid must be strictly increasing");
    }
  }
  if (std::any_of(density_.begin(), density_.end(),
                  [](double p) { return !(p >= 0.0) || !std::isfinite(p); })) {
    throw DegenerateInputError("density values must be finite and >= 0");
  }
  spacing_ = (grid_.back() - grid_.front()) /
             static_cast<double>(grid_.size() - 1);
  cumulative_.resize(grid_.size());
  cumulative_[0] = 0.0;
  for (std::size_t j = 1; j < grid_.size(); ++j) {
    cumulative_[j] = cumulative_[j - 1] +
                     0.5 * (density_[j] + density_[j - 1]) *
                         (grid_[j] - grid_[j - 1]);
  }
}

double DensityEstimate::value_at(double z) const noexcept {
  if (!(z >= grid_.front()) || !(z <= grid_.back())) return 0.0;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), z);
  if (it == grid_.end()) return density_.back();
  const auto k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double t = (z - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return density_[k] + t * (density_[k + 1] - density_[k]);
}

double standard_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double standard_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double sample_stddev(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  const double mean =
      std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double interquartile_range(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

double select_bandwidth(std::span<const double> samples, const KdeConfig& config) {
  if (samples.empty()) throw DegenerateInputError("bandwidth of an empty sample");
  using Kind = BandwidthRule::Kind;
  if (config.bandwidth.kind == Kind::fixed) {
    if (!(config.bandwidth.h > 0.0)) {
      throw ConfigError("fixed bandwidth must be positive");
    }
    return config.bandwidth.h;
  }
  const double n_factor = std::pow(static_cast<double>(samples.size()), -0.2);
  const double sd = sample_stddev(samples);
  double h = 0.0;
  if (config.bandwidth.kind == Kind::scott) {
    h = 1.06 * sd * n_factor;
  } else {
    const double iqr_scale = interquartile_range(samples) / 1.34;
    // A zero IQR with positive spread (heavy ties) falls back to sigma.
    double spread = std::min(sd, iqr_scale);
    if (spread <= 0.0) spread = std::max(sd, iqr_scale);
    h = 0.9 * spread * n_factor;
  }
  return std::max(config.bandwidth_floor, h);
}

DensityEstimate estimate_density(std::span<const double> samples,
                                 const KdeConfig& config) {
  config.validate();
  if (samples.empty()) throw DegenerateInputError("KDE of an empty sample");
  if (std::any_of(samples.begin(), samples.end(),
                  [](double v) { return !std::isfinite(v); })) {
    throw DataError("KDE samples must be finite");
  }
  const double h = select_bandwidth(samples, config);
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *min_it - config.grid_pad * h;
  double hi = *max_it + config.grid_pad * h;
  if (!(hi > lo)) hi = lo + h;  // zero pad on a point mass

  const std::size_t m = config.grid_size;
  const double step = (hi - lo) / static_cast<double>(m - 1);
  std::vector<double> grid(m);
  for (std::size_t j = 0; j < m; ++j) grid[j] = lo + step * static_cast<double>(j);
  grid.back() = hi;

  const double norm = 1.0 / (static_cast<double>(samples.size()) * h);
  std::vector<double> density(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (double s : samples) acc += standard_normal_pdf((grid[j] - s) / h);
    density[j] = acc * norm;
  }
  return DensityEstimate(std::move(grid), std::move(density), h, samples.size());
}

double mass_below(const DensityEstimate& d, double alpha) noexcept {
  const auto grid = d.grid();
  const auto dens = d.density();
  const auto cum = d.cumulative();
  if (std::isnan(alpha) || alpha <= grid.front()) return 0.0;
  if (alpha >= grid.back()) return std::clamp(cum.back(), 0.0, 1.0);
  // Uniform grid: locate the cell directly, then correct for rounding.
  auto k = static_cast<std::size_t>((alpha - grid.front()) / d.spacing());
  k = std::min(k, grid.size() - 2);
  while (k > 0 && grid[k] > alpha) --k;
  while (k + 2 < grid.size() && grid[k + 1] <= alpha) ++k;
  const double width = grid[k + 1] - grid[k];
  const double t = (alpha - grid[k]) / width;
  const double p_alpha = dens[k] + t * (dens[k + 1] - dens[k]);
  const double partial = 0.5 * (dens[k] + p_alpha) * (alpha - grid[k]);
  return std::clamp(cum[k] + partial, 0.0, 1.0);
}

double total_mass(const DensityEstimate& d) noexcept {
  return std::clamp(d.cumulative().back(), 0.0, 1.0);
}

double density_mean(const DensityEstimate& d) {
  const auto grid = d.grid();
  const auto dens = d.density();
  double weighted = 0.0;
  double mass = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    weighted += dens[j] * grid[j];
    mass += dens[j];
  }
  if (!(mass > 0.0)) throw DegenerateInputError("density is identically zero");
  return weighted / mass;
}

void write_density_csv(std::ostream& out, const DensityEstimate& d) {
  out << "z,p\n";
  char buf[64];
  for (std::size_t j = 0; j < d.grid().size(); ++j) {
    auto [p1, e1] = std::to_chars(buf, buf + sizeof buf, d.grid()[j]);
    *p1++ = ',';
    auto [p2, e2] = std::to_chars(p1, buf + sizeof buf, d.density()[j]);
    out.write(buf, p2 - buf);
    out << '\n';
  }
}

}  // namespace logitcal
