#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "logitcal/logit_data.hpp"

namespace logitcal {

enum class BaselineMethod { binary_search, offset_training };

std::string to_string(BaselineMethod m);

struct BaselineResult {
  double alpha = 0.0;
  double accuracy_on_validation = 0.0;
  std::size_t iterations = 0;
  BaselineMethod method = BaselineMethod::binary_search;

  friend bool operator==(const BaselineResult&, const BaselineResult&) = default;
};

nlohmann::ordered_json to_json(const BaselineResult& r);

enum class OffsetInit { class_midpoint, zero };

struct OffsetTrainingConfig {
  std::size_t steps = 1000;
  double initial_step_size = 0.05;  // decays linearly to zero over `steps`
  OffsetInit init = OffsetInit::class_midpoint;

  void validate() const;
};

// Fraction of labeled logits classified correctly by "fake iff z - alpha > 0".
// A logit exactly at alpha is predicted real.
double accuracy(const ClassSplit& labeled, double alpha);

// Interval halving toward the endpoint with the higher accuracy, as in the
// classic threshold-search baseline. Default tolerance is 1e-4 * range.
BaselineResult binary_search_threshold(const ClassSplit& labeled,
                                       std::optional<double> tolerance = {});

// Mean sigmoid cross-entropy of the shifted logits z - alpha.
double bce_loss(const ClassSplit& labeled, double alpha);
// dL/dalpha = mean(y - sigmoid(z - alpha)).
double bce_gradient(const ClassSplit& labeled, double alpha);

// Receives (step, alpha, loss) after every update.
using OffsetObserver = std::function<void(std::size_t, double, double)>;

// Full-batch gradient descent on the scalar offset. The optimisation is
// deterministic; `seed` is recorded for interface parity with the other
// seeded methods and does not influence the result.
BaselineResult train_offset(const ClassSplit& labeled,
                            const OffsetTrainingConfig& config = {},
                            std::uint64_t seed = 0,
                            const OffsetObserver& observer = {});

struct ThresholdSweep {
  double alpha = 0.0;
  double accuracy = 0.0;
};

// Exhaustive accuracy maximisation: accuracy is piecewise constant with
// breakpoints at the sample logits, so every inter-sample midpoint plus the
// two outer rays covers all attainable values. Ties keep the smallest alpha.
ThresholdSweep best_threshold_sweep(const ClassSplit& labeled);

}  // namespace logitcal
