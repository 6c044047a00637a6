#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <json.hpp>

#include "logitcal/kde.hpp"

namespace logitcal {

// Decision rule after calibration: predict fake iff z - alpha > 0.
struct SupervisedResult {
  double alpha = 0.0;
  double risk = 0.0;
  std::size_t iterations = 0;
  double lo = 0.0;
  double hi = 0.0;
};

nlohmann::ordered_json to_json(const SupervisedResult& r);

// KDE estimate of the balanced classification error at threshold alpha:
//
//   R(alpha) = P(z <= alpha | fake) + P(z > alpha | real)
//
// The second term is the upper-tail mass of the real-class density.
double risk(const DensityEstimate& real_density,
            const DensityEstimate& fake_density, double alpha) noexcept;

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  std::size_t iterations = 0;
};

// Brent's bounded minimiser (golden section with parabolic steps). Stops
// once the bracket is narrower than `bracket_tol`.
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo,
                             double hi, double bracket_tol,
                             std::size_t max_iterations = 500);

// Minimises R over the union of both density grids.
SupervisedResult optimize_alpha(const DensityEstimate& real_density,
                                const DensityEstimate& fake_density);

// Exhaustive scan over `resolution` equally spaced alphas on the same bounds;
// ties resolve to the smallest alpha.
SupervisedResult grid_search_alpha(const DensityEstimate& real_density,
                                   const DensityEstimate& fake_density,
                                   std::size_t resolution);

// How the two class densities get their bandwidths.
enum class ClassBandwidth {
  per_class,  // each class runs the configured rule on its own samples
  pooled,     // one shared h from the within-class residuals of both classes
};

std::string to_string(ClassBandwidth b);
ClassBandwidth parse_class_bandwidth(const std::string& name);

// The configured rule applied to class-mean-centred residuals pooled over
// both classes (n = n_real + n_fake, n - 2 degrees of freedom for sigma).
double pooled_bandwidth(std::span<const double> reals, std::span<const double> fakes,
                        const KdeConfig& config);

// Class KDEs followed by optimize_alpha. Throws DegenerateInputError when
// either class is empty.
SupervisedResult calibrate_supervised(std::span<const double> reals,
                                      std::span<const double> fakes,
                                      const KdeConfig& config = {},
                                      ClassBandwidth bandwidth = ClassBandwidth::pooled);

}  // namespace logitcal
