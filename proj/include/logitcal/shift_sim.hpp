#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "logitcal/logit_data.hpp"

namespace logitcal {

// A train/test pair of Gaussian logit worlds. Real logits are N(mu_real,
// sigma_real) in both domains; fake logits are N(mu_fake_train, sigma_fake)
// at train time and drift toward the real class by `conditional_shift` at
// test time.
struct ShiftSpec {
  std::string name = "custom";
  double mu_real = -2.0;
  double sigma_real = 1.0;
  double mu_fake_train = 2.0;
  double sigma_fake = 1.0;
  double conditional_shift = 0.0;
  double pi_train_fake = 0.5;
  double pi_test_fake = 0.5;
  std::uint64_t seed = 0;

  double mu_fake_test() const noexcept { return mu_fake_train - conditional_shift; }

  // Throws ConfigError on non-positive sigmas or priors outside (0, 1).
  void validate() const;
};

struct DerivedShiftQuantities {
  double delta = 0.0;        // log(pi_test / pi_train)
  double delta_prime = 0.0;  // log-odds difference of the fake priors
  double bayes_threshold_test = 0.0;
  double alpha_tilde = 0.0;  // correction making z - alpha > 0 Bayes-optimal
};

// Solves pi_real N(t; real) = pi_fake N(t; fake_test) for t. With equal
// sigmas this is linear; otherwise the root between the two means is taken.
// Throws DegenerateInputError when the classes coincide, when the test fake
// mean does not exceed the real mean, or when no root lies between the means.
DerivedShiftQuantities derive_quantities(const ShiftSpec& spec);

struct SyntheticWorld {
  LogitDataset train;
  LogitDataset test;
  ShiftSpec spec;
  DerivedShiftQuantities derived;
};

SyntheticWorld sample_world(const ShiftSpec& spec, std::size_t n_train,
                            std::size_t n_test);

// Checks the sampled test fake fraction against pi_test_fake.
bool fake_fraction_within(const SyntheticWorld& world, double standard_errors);

struct ThresholdAccuracy {
  double at_zero = 0.0;
  double at_bayes = 0.0;
};

ThresholdAccuracy default_threshold_accuracy(const SyntheticWorld& world);

// Population accuracy of "fake iff z > t" on the test distribution.
double expected_test_accuracy(const ShiftSpec& spec, double threshold);

// Catalog: "no-shift", "conditional-shift", "joint-shift".
std::vector<std::string> scenario_names();
ShiftSpec scenario(const std::string& name);
bool is_scenario(const std::string& name);

// Declarative "key = value" spec files with a `version = 1` line.
ShiftSpec parse_shift_spec(std::istream& in, const std::string& provenance);
ShiftSpec load_shift_spec(const std::filesystem::path& path);
void write_shift_spec(std::ostream& out, const ShiftSpec& spec);

}  // namespace logitcal
