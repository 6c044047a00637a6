#include "logitcal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "logitcal/errors.hpp"

namespace logitcal {

namespace {

void require_both_classes(const ClassSplit& labeled, const char* who) {
  if (labeled.reals.empty() || labeled.fakes.empty()) {
    throw DegenerateInputError(std::string(who) +
                               " needs labeled samples from both classes");
  }
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(BaselineMethod m) {
  return m == BaselineMethod::binary_search ? "binary_search" : "offset_training";
}

nlohmann::ordered_json to_json(const BaselineResult& r) {
  nlohmann::ordered_json j;
  j["alpha"] = r.alpha;
  j["accuracy_on_validation"] = r.accuracy_on_validation;
  j["iterations"] = r.iterations;
  j["method"] = to_string(r.method);
  return j;
}

void OffsetTrainingConfig::validate() const {
  if (steps < 1) throw ConfigError("offset training needs at least one step");
  if (!(initial_step_size > 0.0) || !std::isfinite(initial_step_size)) {
    throw ConfigError("offset training step size must be positive");
  }
}

double accuracy(const ClassSplit& labeled, double alpha) {
  const std::size_t n = labeled.labeled();
  if (n == 0) throw DataError("accuracy needs labeled records");
  std::size_t correct = 0;
  for (double z : labeled.reals) correct += (z - alpha > 0.0) ? 0 : 1;
  for (double z : labeled.fakes) correct += (z - alpha > 0.0) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(n);
}

BaselineResult binary_search_threshold(const ClassSplit& labeled,
                                       std::optional<double> tolerance) {
  require_both_classes(labeled, "binary search");
  const auto [rmin, rmax] = std::minmax_element(labeled.reals.begin(), labeled.reals.end());
  const auto [fmin, fmax] = std::minmax_element(labeled.fakes.begin(), labeled.fakes.end());
  double left = std::min(*rmin, *fmin);
  double right = std::max(*rmax, *fmax);
  const double tol = tolerance.value_or(1e-4 * (right - left));
  if (tolerance && !(*tolerance > 0.0)) {
    throw ConfigError("binary search tolerance must be positive");
  }

  BaselineResult out;
  out.method = BaselineMethod::binary_search;
  while (right - left >= tol && right > left) {
    const double mid = 0.5 * (left + right);
    if (accuracy(labeled, left) > accuracy(labeled, right)) right = mid;
    else left = mid;
    ++out.iterations;
  }
  out.alpha = 0.5 * (left + right);
  out.accuracy_on_validation = accuracy(labeled, out.alpha);
  return out;
}

double bce_loss(const ClassSplit& labeled, double alpha) {
  const std::size_t n = labeled.labeled();
  if (n == 0) throw DataError("loss needs labeled records");
  double total = 0.0;
  for (double z : labeled.reals) total += softplus(z - alpha);
  for (double z : labeled.fakes) total += softplus(-(z - alpha));
  return total / static_cast<double>(n);
}

double bce_gradient(const ClassSplit& labeled, double alpha) {
  const std::size_t n = labeled.labeled();
  if (n == 0) throw DataError("gradient needs labeled records");
  double total = 0.0;
  for (double z : labeled.reals) total -= sigmoid(z - alpha);
  for (double z : labeled.fakes) total += 1.0 - sigmoid(z - alpha);
  return total / static_cast<double>(n);
}

BaselineResult train_offset(const ClassSplit& labeled,
                            const OffsetTrainingConfig& config,
                            std::uint64_t /*seed*/,
                            const OffsetObserver& observer) {
  require_both_classes(labeled, "offset training");
  config.validate();

  double alpha = 0.0;
  if (config.init == OffsetInit::class_midpoint) {
    const auto medians = median_by_class(labeled);
    alpha = 0.5 * (medians.real + medians.fake);
  }
  const auto steps = static_cast<double>(config.steps);
  for (std::size_t k = 0; k < config.steps; ++k) {
    const double step_size =
        config.initial_step_size * (1.0 - static_cast<double>(k) / steps);
    alpha -= step_size * bce_gradient(labeled, alpha);
    if (observer || k + 1 == config.steps) {
      const double loss = bce_loss(labeled, alpha);
      if (!std::isfinite(loss) || !std::isfinite(alpha)) {
        throw DegenerateInputError("offset training diverged at step " +
                                   std::to_string(k) +
                                   "; reduce initial_step_size");
      }
      if (observer) observer(k, alpha, loss);
    }
  }

  BaselineResult out;
  out.alpha = alpha;
  out.accuracy_on_validation = accuracy(labeled, alpha);
  out.iterations = config.steps;
  out.method = BaselineMethod::offset_training;
  return out;
}

ThresholdSweep best_threshold_sweep(const ClassSplit& labeled) {
  if (labeled.labeled() == 0) throw DataError("threshold sweep needs labeled records");
  std::vector<double> z;
  z.reserve(labeled.labeled());
  z.insert(z.end(), labeled.reals.begin(), labeled.reals.end());
  z.insert(z.end(), labeled.fakes.begin(), labeled.fakes.end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());

  std::vector<double> candidates;
  candidates.reserve(z.size() + 1);
  candidates.push_back(z.front() - 1.0);
  for (std::size_t i = 1; i < z.size(); ++i) {
    candidates.push_back(0.5 * (z[i - 1] + z[i]));
  }
  candidates.push_back(z.back());  // ties predict real, so this classifies all as real

  ThresholdSweep best{candidates.front(), accuracy(labeled, candidates.front())};
  for (double a : candidates) {
    const double acc = accuracy(labeled, a);
    if (acc > best.accuracy) best = {a, acc};
  }
  return best;
}

}  // namespace logitcal
