#include "logitcal/calibrate_supervised.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "logitcal/errors.hpp"

namespace logitcal {

nlohmann::ordered_json to_json(const SupervisedResult& r) {
  nlohmann::ordered_json j;
  j["alpha"] = r.alpha;
  j["risk"] = r.risk;
  j["iterations"] = r.iterations;
  j["method"] = "kde_supervised";
  return j;
}

double risk(const DensityEstimate& real_density,
            const DensityEstimate& fake_density, double alpha) noexcept {
  const double missed_fakes = mass_below(fake_density, alpha);
  const double false_alarms =
      total_mass(real_density) - mass_below(real_density, alpha);
  return missed_fakes + false_alarms;
}

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo,
                             double hi, double bracket_tol,
                             std::size_t max_iterations) {
  if (!(hi >= lo)) throw ConfigError("brent_minimize: empty interval");
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo;
  double b = hi;
  double x = a + golden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  // Termination |x - m| <= 2*tol1 - (b-a)/2 implies b - a <= 4*tol1 < bracket_tol.
  const double tol1 = 0.24 * bracket_tol;
  const double tol2 = 2.0 * tol1;

  std::size_t iterations = 0;
  while (iterations < max_iterations) {
    const double m = 0.5 * (a + b);
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    ++iterations;

    bool use_golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      else q = -q;
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = x < m ? b - x : a - x;
      d = golden * e;
    }
    const double u = x + (std::abs(d) >= tol1 ? d : (d > 0.0 ? tol1 : -tol1));
    const double fu = f(u);

    if (fu <= fx) {
      if (u < x) b = x;
      else a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) a = u;
      else b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx, iterations};
}

namespace {

void check_pair(const DensityEstimate& real_density,
                const DensityEstimate& fake_density) {
  if (real_density.sample_count() == 0 || fake_density.sample_count() == 0) {
    throw DegenerateInputError(
        "supervised calibration needs samples from both classes");
  }
}

}  // namespace

SupervisedResult optimize_alpha(const DensityEstimate& real_density,
                                const DensityEstimate& fake_density) {
  check_pair(real_density, fake_density);
  const double lo = std::min(real_density.lo(), fake_density.lo());
  const double hi = std::max(real_density.hi(), fake_density.hi());
  const auto objective = [&](double alpha) {
    return risk(real_density, fake_density, alpha);
  };

  // R is piecewise quadratic between the nodes of the two grids and can be
  // multimodal, so Brent runs inside the cell pair around the best node.
  std::vector<double> nodes;
  nodes.reserve(real_density.grid().size() + fake_density.grid().size());
  nodes.insert(nodes.end(), real_density.grid().begin(), real_density.grid().end());
  nodes.insert(nodes.end(), fake_density.grid().begin(), fake_density.grid().end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> risks(nodes.size());
  std::size_t best_node = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    risks[i] = objective(nodes[i]);
    if (risks[i] < risks[best_node]) best_node = i;
  }
  const double best_risk = risks[best_node];

  // A flat minimum (separated classes) has no unique minimiser; take the
  // middle of the run of nodes at the minimum.
  constexpr double flat_tol = 1e-9;
  std::size_t first = best_node;
  std::size_t last = best_node;
  while (first > 0 && risks[first - 1] <= best_risk + flat_tol) --first;
  while (last + 1 < nodes.size() && risks[last + 1] <= best_risk + flat_tol) ++last;
  if (last - first >= 2) {
    const double mid = 0.5 * (nodes[first] + nodes[last]);
    return {mid, objective(mid), 0, lo, hi};
  }

  const double a = nodes[best_node == 0 ? 0 : best_node - 1];
  const double b = nodes[std::min(best_node + 1, nodes.size() - 1)];
  const auto best = brent_minimize(objective, a, b, 1e-6 * (hi - lo) + 1e-9);

  SupervisedResult out{best.x, best.fx, best.iterations, lo, hi};
  if (best_risk < out.risk) {
    out.alpha = nodes[best_node];
    out.risk = best_risk;
  }
  return out;
}

SupervisedResult grid_search_alpha(const DensityEstimate& real_density,
                                   const DensityEstimate& fake_density,
                                   std::size_t resolution) {
  check_pair(real_density, fake_density);
  if (resolution < 100) throw ConfigError("grid search resolution must be >= 100");
  const double lo = std::min(real_density.lo(), fake_density.lo());
  const double hi = std::max(real_density.hi(), fake_density.hi());
  const double step = (hi - lo) / static_cast<double>(resolution - 1);
  SupervisedResult out{lo, risk(real_density, fake_density, lo), resolution, lo, hi};
  for (std::size_t i = 1; i < resolution; ++i) {
    const double alpha = i + 1 == resolution ? hi : lo + step * static_cast<double>(i);
    const double r = risk(real_density, fake_density, alpha);
    if (r < out.risk) {
      out.alpha = alpha;
      out.risk = r;
    }
  }
  return out;
}

std::string to_string(ClassBandwidth b) {
  return b == ClassBandwidth::pooled ? "pooled" : "per_class";
}

ClassBandwidth parse_class_bandwidth(const std::string& name) {
  if (name == "per_class") return ClassBandwidth::per_class;
  if (name == "pooled") return ClassBandwidth::pooled;
  throw ConfigError("unknown class bandwidth mode '" + name + "' (expected per_class or pooled)");
}

double pooled_bandwidth(std::span<const double> reals, std::span<const double> fakes,
                        const KdeConfig& config) {
  if (reals.empty() || fakes.empty()) {
    throw DegenerateInputError("pooled bandwidth needs both classes");
  }
  if (config.bandwidth.kind == BandwidthRule::Kind::fixed) return select_bandwidth(reals, config);

  auto mean_of = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double real_mean = mean_of(reals);
  const double fake_mean = mean_of(fakes);
  std::vector<double> residuals;
  residuals.reserve(reals.size() + fakes.size());
  double ss = 0.0;
  for (double x : reals) {
    residuals.push_back(x - real_mean);
    ss += (x - real_mean) * (x - real_mean);
  }
  for (double x : fakes) {
    residuals.push_back(x - fake_mean);
    ss += (x - fake_mean) * (x - fake_mean);
  }
  const std::size_t n = residuals.size();
  const double sd = n > 2 ? std::sqrt(ss / static_cast<double>(n - 2)) : 0.0;
  const double n_factor = std::pow(static_cast<double>(n), -0.2);
  double h = 0.0;
  if (config.bandwidth.kind == BandwidthRule::Kind::scott) {
    h = 1.06 * sd * n_factor;
  } else {
    const double iqr_scale = interquartile_range(residuals) / 1.34;
    double spread = std::min(sd, iqr_scale);
    if (spread <= 0.0) spread = std::max(sd, iqr_scale);
    h = 0.9 * spread * n_factor;
  }
  return std::max(config.bandwidth_floor, h);
}

SupervisedResult calibrate_supervised(std::span<const double> reals,
                                      std::span<const double> fakes,
                                      const KdeConfig& config, ClassBandwidth bandwidth) {
  if (reals.empty() || fakes.empty()) {
    throw DegenerateInputError(
        "supervised calibration needs labeled samples from both classes");
  }
  if (bandwidth == ClassBandwidth::per_class) {
    return optimize_alpha(estimate_density(reals, config), estimate_density(fakes, config));
  }
  auto shared = config;
  shared.bandwidth = BandwidthRule::fixed(pooled_bandwidth(reals, fakes, config));
  return optimize_alpha(estimate_density(reals, shared), estimate_density(fakes, shared));
}

}  // namespace logitcal
