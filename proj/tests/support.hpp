#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "logitcal/logit_data.hpp"

namespace testsupport {

inline std::vector<double> normals(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mu, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> uniforms(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.reserve(a.size() + b.size());
  for (double x : b) a.push_back(x);
  return a;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Tabulated standard normal CDF values.
constexpr double kPhi1 = 0.8413447460685429;
constexpr double kPhi2 = 0.9772498680518208;

inline logitcal::ClassSplit split_of(std::vector<double> reals, std::vector<double> fakes) {
  logitcal::ClassSplit s;
  s.reals = std::move(reals);
  s.fakes = std::move(fakes);
  return s;
}

inline logitcal::LogitDataset labeled_dataset(const std::vector<double>& reals,
                                              const std::vector<double>& fakes,
                                              const std::string& source = "src") {
  logitcal::LogitDataset ds;
  ds.provenance = "test";
  for (double z : reals) ds.records.push_back({z, logitcal::Label::real, source, std::nullopt});
  for (double z : fakes) ds.records.push_back({z, logitcal::Label::fake, source, std::nullopt});
  return ds;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace testsupport
