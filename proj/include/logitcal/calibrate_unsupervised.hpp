#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "logitcal/kde.hpp"

namespace logitcal {

enum class UnsupervisedMethod { closed_form, root_find, confidence_weighted };

std::string to_string(UnsupervisedMethod m);

struct UnsupervisedResult {
  double alpha = 0.0;
  double residual = 0.0;  // |Phi(alpha)|
  UnsupervisedMethod method = UnsupervisedMethod::closed_form;
};

nlohmann::ordered_json to_json(const UnsupervisedResult& r);

// Trapezoidal zeroth and first moments of the tabulated density.
struct DensityMoments {
  double m0 = 0.0;
  double m1 = 0.0;
};

DensityMoments trapezoid_moments(const DensityEstimate& d) noexcept;

// Phi(alpha) = integral of (z - alpha) p(z) dz = M1 - alpha * M0.
double moment_imbalance(const DensityEstimate& d, double alpha) noexcept;

// alpha = sum_j p_j z_j / sum_j p_j, the balancing point of Phi.
UnsupervisedResult solve_alpha_closed_form(const DensityEstimate& d);

// Bisection on Phi over the grid span; cross-check for the closed form.
UnsupervisedResult solve_alpha_root_find(const DensityEstimate& d);

// Opt-in extension: centre of mass of p(z) * |z - m|^gamma, where m is the
// unweighted centre of mass. Far-from-centre (confident) logits gain weight.
// gamma == 0 reproduces solve_alpha_closed_form exactly.
UnsupervisedResult confidence_weighted_alpha(std::span<const double> logits,
                                             const DensityEstimate& d,
                                             double gamma);

}  // namespace logitcal
