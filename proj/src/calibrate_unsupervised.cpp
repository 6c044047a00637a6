#include "logitcal/calibrate_unsupervised.hpp"

#include <cmath>

#include "logitcal/errors.hpp"

namespace logitcal {

std::string to_string(UnsupervisedMethod m) {
  switch (m) {
    case UnsupervisedMethod::closed_form: return "closed_form";
    case UnsupervisedMethod::root_find: return "root_find";
    case UnsupervisedMethod::confidence_weighted: return "confidence_weighted";
  }
  return "closed_form";
}

nlohmann::ordered_json to_json(const UnsupervisedResult& r) {
  nlohmann::ordered_json j;
  j["alpha"] = r.alpha;
  j["residual"] = r.residual;
  j["method"] = "kde_unsupervised";
  j["solver"] = to_string(r.method);
  return j;
}

DensityMoments trapezoid_moments(const DensityEstimate& d) noexcept {
  const auto z = d.grid();
  const auto p = d.density();
  DensityMoments m;
  for (std::size_t j = 1; j < z.size(); ++j) {
    const double dz = z[j] - z[j - 1];
    m.m0 += 0.5 * dz * (p[j] + p[j - 1]);
    m.m1 += 0.5 * dz * (p[j] * z[j] + p[j - 1] * z[j - 1]);
  }
  return m;
}

double moment_imbalance(const DensityEstimate& d, double alpha) noexcept {
  const auto m = trapezoid_moments(d);
  return m.m1 - alpha * m.m0;
}

UnsupervisedResult solve_alpha_closed_form(const DensityEstimate& d) {
  UnsupervisedResult out;
  out.alpha = density_mean(d);
  out.residual = std::abs(moment_imbalance(d, out.alpha));
  out.method = UnsupervisedMethod::closed_form;
  if (!(out.residual < 1e-6 * d.span_width())) {
    throw DegenerateInputError("moment balance residual " +
                               std::to_string(out.residual) +
                               " exceeds tolerance; grid too coarse");
  }
  return out;
}

UnsupervisedResult solve_alpha_root_find(const DensityEstimate& d) {
  const auto m = trapezoid_moments(d);
  if (!(m.m0 > 0.0)) throw DegenerateInputError("density has zero mass");
  const auto phi = [&](double a) { return m.m1 - a * m.m0; };
  double lo = d.lo();
  double hi = d.hi();
  // Phi is decreasing with slope -M0; the root lies inside the support.
  const double tol = 1e-10 * d.span_width();
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  UnsupervisedResult out;
  out.alpha = 0.5 * (lo + hi);
  out.residual = std::abs(phi(out.alpha));
  out.method = UnsupervisedMethod::root_find;
  return out;
}

UnsupervisedResult confidence_weighted_alpha(std::span<const double> logits,
                                             const DensityEstimate& d,
                                             double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be a finite non-negative number");
  }
  if (logits.size() != d.sample_count()) {
    throw ConfigError("logits do not match the density's sample count");
  }
  if (gamma == 0.0) return solve_alpha_closed_form(d);

  const double centre = density_mean(d);
  const auto z = d.grid();
  const auto p = d.density();
  double weighted = 0.0;
  double mass = 0.0;
  std::vector<double> wp(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    wp[j] = p[j] * std::pow(std::abs(z[j] - centre), gamma);
    weighted += wp[j] * z[j];
    mass += wp[j];
  }
  if (!(mass > 0.0)) throw DegenerateInputError("weighted density is zero");

  UnsupervisedResult out;
  out.alpha = weighted / mass;
  out.method = UnsupervisedMethod::confidence_weighted;
  double phi = 0.0;
  for (std::size_t j = 1; j < z.size(); ++j) {
    phi += 0.5 * (z[j] - z[j - 1]) *
           (wp[j] * (z[j] - out.alpha) + wp[j - 1] * (z[j - 1] - out.alpha));
  }
  out.residual = std::abs(phi);
  return out;
}

}  // namespace logitcal
