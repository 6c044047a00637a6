#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "logitcal/calibrate_supervised.hpp"
#include "logitcal/calibrate_unsupervised.hpp"
#include "logitcal/errors.hpp"
#include "logitcal/shift_sim.hpp"
#include "support.hpp"

using namespace logitcal;

namespace {

ShiftSpec symmetric(double c = 0.0, double pi_test = 0.5) {
  ShiftSpec s;
  s.conditional_shift = c;
  s.pi_test_fake = pi_test;
  return s;
}

double gauss_logpdf(double z, double mu, double s) {
  const double u = (z - mu) / s;
  return -0.5 * u * u - std::log(s);
}

}  // namespace

TEST(DeriveQuantities, SymmetricCase) {
  EXPECT_NEAR(derive_quantities(symmetric()).bayes_threshold_test, 0.0, 1e-15);
}

TEST(DeriveQuantities, ConditionalShiftMidpoint) {
  EXPECT_NEAR(derive_quantities(symmetric(2.0)).bayes_threshold_test, -1.0, 1e-12);
}

TEST(DeriveQuantities, PriorTermWithDeltaPrimeOne) {
  ShiftSpec s = symmetric(2.0, 1.0 / (1.0 + std::exp(-1.0)));
  const auto d = derive_quantities(s);
  EXPECT_NEAR(d.delta_prime, 1.0, 1e-12);
  EXPECT_NEAR(d.bayes_threshold_test, -1.5, 1e-9);
  EXPECT_NEAR(d.bayes_threshold_test, -1.0 + std::log(0.269 / 0.731) / 2.0, 2e-3);
  EXPECT_EQ(d.alpha_tilde, d.bayes_threshold_test);
}

TEST(DeriveQuantities, DeltaDefinitions) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> prior(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    ShiftSpec s;
    s.pi_train_fake = prior(rng);
    s.pi_test_fake = prior(rng);
    const auto d = derive_quantities(s);
    auto logit = [](double p) { return std::log(p / (1 - p)); };
    EXPECT_NEAR(d.delta_prime, logit(s.pi_test_fake) - logit(s.pi_train_fake), 1e-12);
    EXPECT_NEAR(d.delta, std::log(s.pi_test_fake / s.pi_train_fake), 1e-12);
  }
  ShiftSpec same;
  same.pi_train_fake = same.pi_test_fake = 0.3;
  EXPECT_EQ(derive_quantities(same).delta, 0.0);
  EXPECT_EQ(derive_quantities(same).delta_prime, 0.0);
}

TEST(DeriveQuantities, UnequalVarianceRootEqualisesWeightedDensities) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> sd(0.4, 2.5), prior(0.1, 0.9);
  for (int i = 0; i < 50; ++i) {
    ShiftSpec s;
    s.mu_real = -1.5;
    s.mu_fake_train = 2.5;
    s.sigma_real = sd(rng);
    s.sigma_fake = sd(rng);
    s.pi_test_fake = prior(rng);
    try {
      const double t = derive_quantities(s).bayes_threshold_test;
      EXPECT_GT(t, s.mu_real);
      EXPECT_LT(t, s.mu_fake_test());
      const double lhs = std::log(1 - s.pi_test_fake) + gauss_logpdf(t, s.mu_real, s.sigma_real);
      const double rhs = std::log(s.pi_test_fake) + gauss_logpdf(t, s.mu_fake_test(), s.sigma_fake);
      EXPECT_NEAR(lhs, rhs, 1e-9);
    } catch (const DegenerateInputError&) {
      // No crossing between the means for this draw: allowed, must be rare.
      EXPECT_TRUE(s.pi_test_fake < 0.2 || s.pi_test_fake > 0.8);
    }
  }
}

TEST(DeriveQuantities, CoincidentClassesAreDegenerate) {
  ShiftSpec s = symmetric(4.0);
  EXPECT_THROW(derive_quantities(s), DegenerateInputError);
}

TEST(ShiftSpec, Validation) {
  ShiftSpec s;
  s.sigma_real = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.pi_test_fake = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.pi_train_fake = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(SampleWorld, DeterministicUnderSeed) {
  ShiftSpec s = symmetric(1.0);
  s.seed = 42;
  const auto a = sample_world(s, 300, 500);
  const auto b = sample_world(s, 300, 500);
  EXPECT_EQ(a.train.records, b.train.records);
  EXPECT_EQ(a.test.records, b.test.records);
  s.seed = 43;
  EXPECT_NE(sample_world(s, 300, 500).test.records, a.test.records);
}

TEST(SampleWorld, TagsAndCounts) {
  const auto w = sample_world(symmetric(), 10, 20);
  EXPECT_EQ(w.train.size(), 10u);
  EXPECT_EQ(w.test.size(), 20u);
  for (const auto& r : w.train.records) EXPECT_EQ(r.source, "train");
  for (const auto& r : w.test.records) {
    EXPECT_EQ(r.source, "test");
    EXPECT_TRUE(r.label.has_value());
    EXPECT_TRUE(std::isfinite(r.logit));
  }
  EXPECT_THROW(sample_world(symmetric(), 1, 20), ConfigError);
  EXPECT_THROW(sample_world(symmetric(), 20, 1), ConfigError);
}

TEST(SampleWorld, ExchangeableWithoutShift) {
  const double n = 1000.0;
  const double critical = 1.628 * std::sqrt(2.0 / n);  // two-sample KS, 1% level
  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ShiftSpec s = symmetric();
    s.seed = seed;
    const auto w = sample_world(s, 1000, 1000);
    accepted += testsupport::ks_statistic(w.train.logits(), w.test.logits()) < critical;
  }
  EXPECT_GE(accepted, 95);
}

TEST(SampleWorld, FakeCountConcentrates) {
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ShiftSpec s = symmetric();
    s.seed = seed;
    const auto w = sample_world(s, 2, 10000);
    const auto fakes = split_by_label(w.test).fakes.size();
    inside += fakes >= 4850 && fakes <= 5150;
    EXPECT_TRUE(fake_fraction_within(w, 4.5));
  }
  EXPECT_GE(inside, 198);
}

TEST(SampleWorld, ClassMomentsFollowTheSpec) {
  ShiftSpec s;
  s.mu_real = -1;
  s.sigma_real = 0.5;
  s.mu_fake_train = 3;
  s.sigma_fake = 2;
  s.conditional_shift = 1.5;
  s.pi_train_fake = 0.3;
  s.pi_test_fake = 0.6;
  const auto w = sample_world(s, 20000, 20000);
  const auto tr = split_by_label(w.train);
  const auto te = split_by_label(w.test);
  EXPECT_NEAR(testsupport::mean(tr.fakes), 3.0, 0.05);
  EXPECT_NEAR(testsupport::mean(te.fakes), 1.5, 0.05);
  EXPECT_NEAR(testsupport::mean(te.reals), -1.0, 0.02);
  EXPECT_NEAR(sample_stddev(te.fakes), 2.0, 0.05);
  EXPECT_NEAR(sample_stddev(tr.reals), 0.5, 0.02);
  EXPECT_NEAR(static_cast<double>(tr.fakes.size()) / 20000.0, 0.3, 0.015);
  EXPECT_NEAR(static_cast<double>(te.fakes.size()) / 20000.0, 0.6, 0.015);
}

TEST(DefaultThreshold, PropositionOneNumbers) {
  ShiftSpec s = symmetric(2.0);
  s.seed = 3;
  const auto acc = default_threshold_accuracy(sample_world(s, 2, 100000));
  EXPECT_NEAR(acc.at_zero, (testsupport::kPhi2 + 0.5) / 2.0, 0.005);
  EXPECT_NEAR(acc.at_bayes, testsupport::kPhi1, 0.005);
}

TEST(DefaultThreshold, NoShiftControl) {
  const auto acc = default_threshold_accuracy(sample_world(symmetric(), 2, 100000));
  EXPECT_NEAR(acc.at_zero, acc.at_bayes, 0.005);
}

TEST(DefaultThreshold, PriorShiftOnly) {
  ShiftSpec s = symmetric(0.0, 0.9);
  const auto w = sample_world(s, 2, 100000);
  const auto acc = default_threshold_accuracy(w);
  const double t = w.derived.bayes_threshold_test;
  const double expect_zero = 0.1 * testsupport::kPhi2 + 0.9 * testsupport::kPhi2;
  const double expect_bayes = 0.1 * standard_normal_cdf(t + 2) + 0.9 * standard_normal_cdf(2 - t);
  EXPECT_GT(acc.at_bayes, acc.at_zero);
  EXPECT_NEAR(expect_bayes - expect_zero, expected_test_accuracy(s, t) - expected_test_accuracy(s, 0), 1e-12);
  EXPECT_NEAR(acc.at_bayes - acc.at_zero, expect_bayes - expect_zero, 0.003);
}

TEST(DefaultThreshold, GapExceedsThreeStandardErrors) {
  for (double c : {1.5, 2.0, 3.0}) {
    ShiftSpec s = symmetric(c);
    const auto w = sample_world(s, 2, 100000);
    ASSERT_GT(std::abs(w.derived.bayes_threshold_test), 0.5);
    const auto acc = default_threshold_accuracy(w);
    const double se = std::sqrt(acc.at_zero * (1 - acc.at_zero) / 100000.0);
    EXPECT_GT(acc.at_bayes - acc.at_zero, 3 * se);
  }
}

TEST(ExpectedAccuracy, BayesThresholdIsTheMaximiser) {
  ShiftSpec s;
  s.sigma_fake = 1.7;
  s.conditional_shift = 1.0;
  s.pi_test_fake = 0.35;
  const double t = derive_quantities(s).bayes_threshold_test;
  const double best = expected_test_accuracy(s, t);
  for (double d = -1; d <= 1; d += 0.01) EXPECT_LE(expected_test_accuracy(s, t + d), best + 1e-15);
}

TEST(Catalog, ThreeScenarios) {
  EXPECT_EQ(scenario_names(), (std::vector<std::string>{"no-shift", "conditional-shift", "joint-shift"}));
  EXPECT_EQ(scenario("no-shift").conditional_shift, 0.0);
  const auto cond = scenario("conditional-shift");
  EXPECT_GT(cond.conditional_shift, 0.0);
  EXPECT_EQ(cond.pi_train_fake, cond.pi_test_fake);
  const auto joint = scenario("joint-shift");
  EXPECT_GT(joint.conditional_shift, 0.0);
  EXPECT_NE(joint.pi_train_fake, joint.pi_test_fake);
  EXPECT_TRUE(is_scenario("joint-shift"));
  EXPECT_FALSE(is_scenario("joint"));
  EXPECT_THROW(scenario("joint"), ConfigError);
}

TEST(SpecFile, RoundTripAndVersioning) {
  ShiftSpec s;
  s.name = "mine";
  s.mu_real = -1.25;
  s.sigma_fake = 0.75;
  s.conditional_shift = 0.125;
  s.pi_train_fake = 0.2;
  s.seed = 99;
  std::stringstream buf;
  write_shift_spec(buf, s);
  const auto back = parse_shift_spec(buf, "mem");
  EXPECT_EQ(back.name, s.name);
  EXPECT_EQ(back.mu_real, s.mu_real);
  EXPECT_EQ(back.sigma_fake, s.sigma_fake);
  EXPECT_EQ(back.conditional_shift, s.conditional_shift);
  EXPECT_EQ(back.pi_train_fake, s.pi_train_fake);
  EXPECT_EQ(back.seed, s.seed);

  std::istringstream no_version("mu_real = 1\n");
  EXPECT_THROW(parse_shift_spec(no_version, "mem"), ConfigError);
  std::istringstream unknown("version = 1\nmu = 1\n");
  EXPECT_THROW(parse_shift_spec(unknown, "mem"), ConfigError);
  std::istringstream based("version = 1\nbase = conditional-shift\nseed = 5\n");
  const auto b = parse_shift_spec(based, "mem");
  EXPECT_EQ(b.conditional_shift, scenario("conditional-shift").conditional_shift);
  EXPECT_EQ(b.seed, 5u);
}

TEST(OracleRecovery, SupervisedWithinQuarterSigma) {
  for (double separation : {3.0, 4.0, 6.0}) {
    ShiftSpec s;
    s.mu_real = -1.0;
    s.mu_fake_train = -1.0 + separation;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      s.seed = seed;
      const auto w = sample_world(s, 2, 4000);
      const auto v = subsample_validation(w.test, 100, seed, true).validation;
      const auto split = split_by_label(v);
      const double a = calibrate_supervised(split.reals, split.fakes).alpha;
      hits += std::abs(a - w.derived.bayes_threshold_test) <= 0.25;
    }
    EXPECT_GE(hits, 45) << "separation " << separation;
  }
}

TEST(OracleRecovery, UnsupervisedUnderBalancedPriors) {
  for (const auto& name : {"no-shift", "conditional-shift"}) {
    ShiftSpec s = scenario(name);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      s.seed = seed;
      const auto w = sample_world(s, 2, 5000);
      const auto v = subsample_validation(w.test, 1000, seed, false).validation;
      const double a = solve_alpha_closed_form(estimate_density(v.logits())).alpha;
      hits += std::abs(a - w.derived.bayes_threshold_test) <= 0.3;
    }
    EXPECT_GE(hits, 45) << name;
  }
}
