#include "logitcal/shift_sim.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "logitcal/errors.hpp"
#include "logitcal/kde.hpp"
#include "logitcal/kv_config.hpp"

namespace logitcal {

namespace {

constexpr int kSpecVersion = 1;

// Log of the prior-weighted fake/real density ratio at t.
double log_ratio(const ShiftSpec& s, double t) {
  const double zr = (t - s.mu_real) / s.sigma_real;
  const double zf = (t - s.mu_fake_test()) / s.sigma_fake;
  return std::log(s.pi_test_fake / s.sigma_fake) - 0.5 * zf * zf -
         std::log((1.0 - s.pi_test_fake) / s.sigma_real) + 0.5 * zr * zr;
}

double bayes_threshold(const ShiftSpec& s) {
  const double mu0 = s.mu_real;
  const double mu1 = s.mu_fake_test();
  if (s.sigma_real == s.sigma_fake) {
    if (mu1 == mu0) {
      throw DegenerateInputError(
          "test fake and real logit distributions coincide; no threshold");
    }
    if (mu1 < mu0) {
      throw DegenerateInputError(
          "test fake mean lies below the real mean; the rule z > t cannot be "
          "Bayes-optimal");
    }
    const double var = s.sigma_real * s.sigma_real;
    return 0.5 * (mu0 + mu1) +
           var * std::log((1.0 - s.pi_test_fake) / s.pi_test_fake) / (mu1 - mu0);
  }
  if (!(mu1 > mu0)) {
    throw DegenerateInputError("test fake mean must exceed the real mean");
  }
  // log_ratio(t) = a t^2 + b t + c; the Bayes boundary is the root where the
  // ratio increases (real -> fake), required to lie between the means.
  const double i0 = 1.0 / (s.sigma_real * s.sigma_real);
  const double i1 = 1.0 / (s.sigma_fake * s.sigma_fake);
  const double a = 0.5 * (i0 - i1);
  const double b = mu1 * i1 - mu0 * i0;
  const double c = log_ratio(s, 0.0);
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw DegenerateInputError("no Bayes boundary exists");
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double roots[2] = {q / a, q != 0.0 ? c / q : q / a};
  for (double t : roots) {
    const double slope = 2.0 * a * t + b;
    if (slope > 0.0 && t >= mu0 && t <= mu1) return t;
  }
  throw DegenerateInputError("no Bayes boundary between the class means");
}

LogitDataset sample_domain(std::mt19937_64& rng, std::size_t n, double pi_fake,
                           double mu_real, double sigma_real, double mu_fake,
                           double sigma_fake, const std::string& tag,
                           const std::string& provenance) {
  std::bernoulli_distribution is_fake(pi_fake);
  std::normal_distribution<double> real_dist(mu_real, sigma_real);
  std::normal_distribution<double> fake_dist(mu_fake, sigma_fake);
  LogitDataset ds;
  ds.provenance = provenance;
  ds.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LogitRecord r;
    const bool fake = is_fake(rng);
    r.logit = fake ? fake_dist(rng) : real_dist(rng);
    r.label = fake ? Label::fake : Label::real;
    r.source = tag;
    r.id = tag + "-" + std::to_string(i);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

std::string spec_digest(const ShiftSpec& s) {
  std::ostringstream os;
  os << std::setprecision(17) << "sim:" << s.name << "{mu_real=" << s.mu_real
     << ",sigma_real=" << s.sigma_real << ",mu_fake_train=" << s.mu_fake_train
     << ",sigma_fake=" << s.sigma_fake << ",c=" << s.conditional_shift
     << ",pi_train=" << s.pi_train_fake << ",pi_test=" << s.pi_test_fake
     << ",seed=" << s.seed << "}";
  return os.str();
}

}  // namespace

void ShiftSpec::validate() const {
  const double values[] = {mu_real, sigma_real, mu_fake_train, sigma_fake,
                           conditional_shift, pi_train_fake, pi_test_fake};
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("shift spec values must be finite");
  }
  if (!(sigma_real > 0.0) || !(sigma_fake > 0.0)) {
    throw ConfigError("shift spec sigmas must be positive");
  }
  if (!(pi_train_fake > 0.0 && pi_train_fake < 1.0) ||
      !(pi_test_fake > 0.0 && pi_test_fake < 1.0)) {
    throw ConfigError("shift spec priors must lie strictly inside (0, 1)");
  }
}

DerivedShiftQuantities derive_quantities(const ShiftSpec& spec) {
  spec.validate();
  DerivedShiftQuantities d;
  d.delta = std::log(spec.pi_test_fake / spec.pi_train_fake);
  d.delta_prime = std::log(spec.pi_test_fake * (1.0 - spec.pi_train_fake) /
                           (spec.pi_train_fake * (1.0 - spec.pi_test_fake)));
  d.bayes_threshold_test = bayes_threshold(spec);
  d.alpha_tilde = d.bayes_threshold_test;
  return d;
}

SyntheticWorld sample_world(const ShiftSpec& spec, std::size_t n_train,
                            std::size_t n_test) {
  if (n_train < 2 || n_test < 2) {
    throw ConfigError("simulated worlds need at least 2 train and 2 test logits");
  }
  SyntheticWorld world;
  world.spec = spec;
  world.derived = derive_quantities(spec);
  const auto digest = spec_digest(spec);

  std::seed_seq train_seq{spec.seed, std::uint64_t{0}};
  std::mt19937_64 train_rng(train_seq);
  world.train = sample_domain(train_rng, n_train, spec.pi_train_fake, spec.mu_real,
                              spec.sigma_real, spec.mu_fake_train, spec.sigma_fake,
                              "train", digest + "#train");
  std::seed_seq test_seq{spec.seed, std::uint64_t{1}};
  std::mt19937_64 test_rng(test_seq);
  world.test = sample_domain(test_rng, n_test, spec.pi_test_fake, spec.mu_real,
                             spec.sigma_real, spec.mu_fake_test(), spec.sigma_fake,
                             "test", digest + "#test");
  return world;
}

bool fake_fraction_within(const SyntheticWorld& world, double standard_errors) {
  const auto n = static_cast<double>(world.test.size());
  double fakes = 0.0;
  for (const auto& r : world.test.records) fakes += (r.label == Label::fake) ? 1.0 : 0.0;
  const double p = world.spec.pi_test_fake;
  const double se = std::sqrt(p * (1.0 - p) / n);
  return std::abs(fakes / n - p) <= standard_errors * se;
}

ThresholdAccuracy default_threshold_accuracy(const SyntheticWorld& world) {
  std::size_t at_zero = 0;
  std::size_t at_bayes = 0;
  const double t = world.derived.bayes_threshold_test;
  for (const auto& r : world.test.records) {
    const bool fake = r.label == Label::fake;
    at_zero += ((r.logit > 0.0) == fake) ? 1 : 0;
    at_bayes += ((r.logit - t > 0.0) == fake) ? 1 : 0;
  }
  const auto n = static_cast<double>(world.test.size());
  return {static_cast<double>(at_zero) / n, static_cast<double>(at_bayes) / n};
}

double expected_test_accuracy(const ShiftSpec& spec, double threshold) {
  const double real_ok =
      standard_normal_cdf((threshold - spec.mu_real) / spec.sigma_real);
  const double fake_ok =
      1.0 - standard_normal_cdf((threshold - spec.mu_fake_test()) / spec.sigma_fake);
  return (1.0 - spec.pi_test_fake) * real_ok + spec.pi_test_fake * fake_ok;
}

std::vector<std::string> scenario_names() {
  return {"no-shift", "conditional-shift", "joint-shift"};
}

bool is_scenario(const std::string& name) {
  for (const auto& n : scenario_names()) {
    if (n == name) return true;
  }
  return false;
}

ShiftSpec scenario(const std::string& name) {
  ShiftSpec s;
  s.name = name;
  if (name == "no-shift") {
    return s;
  }
  if (name == "conditional-shift") {
    s.mu_real = -3.0;
    s.mu_fake_train = 3.0;
    s.conditional_shift = 2.0;
    return s;
  }
  if (name == "joint-shift") {
    // Fakes drift by c = 2 and the fake prior moves from 1/(1+e) at train
    // time to 1/2 at test time, i.e. delta' = 1.
    s.conditional_shift = 2.0;
    s.pi_train_fake = 1.0 / (1.0 + std::exp(1.0));
    s.pi_test_fake = 0.5;
    return s;
  }
  throw ConfigError("unknown scenario '" + name +
                    "' (expected no-shift, conditional-shift or joint-shift)");
}

ShiftSpec parse_shift_spec(std::istream& in, const std::string& provenance) {
  const auto kv = KeyValueConfig::parse(in, provenance);
  kv.reject_unknown({"version", "name", "base", "mu_real", "sigma_real",
                     "mu_fake_train", "sigma_fake", "conditional_shift",
                     "pi_train_fake", "pi_test_fake", "seed"});
  if (!kv.has("version") || kv.get_uint("version") != kSpecVersion) {
    throw ConfigError(provenance + ": expected 'version = " +
                      std::to_string(kSpecVersion) + "'");
  }
  ShiftSpec s = kv.has("base") ? scenario(kv.get("base")) : ShiftSpec{};
  if (kv.has("name")) s.name = kv.get("name");
  auto read = [&](const char* key, double& field) {
    if (kv.has(key)) field = kv.get_double(key);
  };
  read("mu_real", s.mu_real);
  read("sigma_real", s.sigma_real);
  read("mu_fake_train", s.mu_fake_train);
  read("sigma_fake", s.sigma_fake);
  read("conditional_shift", s.conditional_shift);
  read("pi_train_fake", s.pi_train_fake);
  read("pi_test_fake", s.pi_test_fake);
  if (kv.has("seed")) s.seed = kv.get_uint("seed");
  s.validate();
  return s;
}

ShiftSpec load_shift_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open shift spec " + path.string());
  return parse_shift_spec(in, path.string());
}

void write_shift_spec(std::ostream& out, const ShiftSpec& s) {
  out << std::setprecision(17);
  out << "version = " << kSpecVersion << '\n'
      << "name = " << s.name << '\n'
      << "mu_real = " << s.mu_real << '\n'
      << "sigma_real = " << s.sigma_real << '\n'
      << "mu_fake_train = " << s.mu_fake_train << '\n'
      << "sigma_fake = " << s.sigma_fake << '\n'
      << "conditional_shift = " << s.conditional_shift << '\n'
      << "pi_train_fake = " << s.pi_train_fake << '\n'
      << "pi_test_fake = " << s.pi_test_fake << '\n'
      << "seed = " << s.seed << '\n';
}

}  // namespace logitcal
