// logitcal: post-hoc logit calibration command line.
//
//   logitcal calibrate --input val.csv --method kde_supervised
//   logitcal evaluate  --input conditional-shift --method kde_supervised --out out/
//   logitcal simulate  --scenario joint-shift --out world.csv
//   logitcal sweep     --input conditional-shift --sizes 10,100,1000 --out out/
//   logitcal compare   --input data.csv --method kde_supervised,binary_search --out out/
//   logitcal plot      --report out/report.json --out plots/

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logitcal/baselines.hpp"
#include "logitcal/calibrate_supervised.hpp"
#include "logitcal/calibrate_unsupervised.hpp"
#include "logitcal/errors.hpp"
#include "logitcal/eval_harness.hpp"
#include "logitcal/kde.hpp"
#include "logitcal/kv_config.hpp"
#include "logitcal/logit_data.hpp"
#include "logitcal/shift_sim.hpp"

namespace {

using namespace logitcal;
using ojson = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

// Flags shared by evaluate / sweep / compare. Everything is kept as text and
// layered over the config file so both routes go through one parser.
struct ExperimentFlags {
  std::string config_file;
  std::string input;
  std::string format;
  std::vector<std::string> methods;
  std::vector<std::string> seeds;
  std::string validation_size;
  std::string out;
  std::string bandwidth;
  std::string class_bandwidth;
  std::string grid_size;
  std::string grid_pad;
  std::string sampling;
  std::string gamma;
  std::string n_test;
  std::string sizes;
  std::string offset_steps;
  std::string offset_step_size;

  void attach(CLI::App* cmd, bool with_sizes) {
    cmd->add_option("--config", config_file, "key = value experiment file");
    cmd->add_option("--input", input, "data file, scenario name or .spec file");
    cmd->add_option("--format", format, "csv or jsonl (default: from extension)");
    cmd->add_option("--method", methods, "calibration method(s)")->delimiter(',');
    cmd->add_option("--seed", seeds, "seed(s)")->delimiter(',');
    cmd->add_option("--validation-size", validation_size, "validation subset size");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--bandwidth", bandwidth, "silverman, scott or fixed:<h>");
    cmd->add_option("--class-bandwidth", class_bandwidth, "per_class or pooled");
    cmd->add_option("--grid-size", grid_size, "KDE grid points");
    cmd->add_option("--grid-pad", grid_pad, "KDE grid padding in bandwidths");
    cmd->add_option("--sampling", sampling, "auto, stratified or uniform");
    cmd->add_option("--gamma", gamma, "confidence weighting for kde_unsupervised");
    cmd->add_option("--n-test", n_test, "test pool size for simulated inputs");
    cmd->add_option("--offset-steps", offset_steps, "offset_training steps");
    cmd->add_option("--offset-step-size", offset_step_size, "offset_training initial step");
    if (with_sizes) cmd->add_option("--sizes", sizes, "comma-separated validation sizes");
  }

  ExperimentConfig resolve() const {
    KeyValueConfig kv = config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_file);
    auto set = [&](const char* key, const std::string& v) {
      if (!v.empty()) kv.set(key, v);
    };
    set("input", input);
    set("format", format);
    if (!methods.empty()) kv.set("methods", join(methods));
    if (!seeds.empty()) kv.set("seeds", join(seeds));
    set("validation_size", validation_size);
    set("output_dir", out);
    set("bandwidth", bandwidth);
    set("class_bandwidth", class_bandwidth);
    set("grid_size", grid_size);
    set("grid_pad", grid_pad);
    set("sampling", sampling);
    set("gamma", gamma);
    set("n_test", n_test);
    set("sizes", sizes);
    set("offset_steps", offset_steps);
    set("offset_step_size", offset_step_size);
    auto cfg = config_from_kv(kv);
    cfg.validate();
    return cfg;
  }
};

void emit_json(const ojson& j, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw DataError("cannot write " + out_file);
  out << j.dump(2) << '\n';
}

int run_calibrate(const std::string& input, const std::string& format,
                  const std::string& method_name, std::uint64_t seed,
                  std::optional<std::size_t> validation_size, const std::string& bandwidth,
                  double gamma, const std::string& out) {
  KdeConfig kde;
  if (!bandwidth.empty()) kde.bandwidth = BandwidthRule::parse(bandwidth);
  const Method method = parse_method(method_name);
  const std::filesystem::path path(input);
  auto ds = parse_dataset(path, format.empty() ? format_from_path(path) : parse_format(format));
  if (validation_size) {
    ds = subsample_validation(ds, *validation_size, seed, is_supervised(method)).validation;
  }

  ojson result;
  switch (method) {
    case Method::kde_supervised: {
      const auto split = split_by_label(ds);
      result = to_json(calibrate_supervised(split.reals, split.fakes, kde));
      break;
    }
    case Method::kde_unsupervised: {
      const auto logits = ds.logits();
      const auto density = estimate_density(logits, kde);
      result = to_json(confidence_weighted_alpha(logits, density, gamma));
      break;
    }
    case Method::binary_search:
      result = to_json(binary_search_threshold(split_by_label(ds)));
      break;
    case Method::offset_training:
      result = to_json(train_offset(split_by_label(ds), {}, seed));
      break;
    case Method::threshold_oracle: {
      const auto split = split_by_label(ds);
      if (split.reals.empty() || split.fakes.empty()) {
        throw DegenerateInputError("threshold oracle needs both classes");
      }
      const auto best = best_threshold_sweep(split);
      result = {{"alpha", best.alpha},
                {"accuracy_on_validation", best.accuracy},
                {"method", "threshold_oracle"}};
      break;
    }
  }
  emit_json(result, out);
  return 0;
}

int run_simulate(const std::string& scenario_name, const std::string& spec_file,
                 std::optional<std::uint64_t> seed, std::size_t n_train, std::size_t n_test,
                 const std::string& format, const std::string& out) {
  if (scenario_name.empty() == spec_file.empty()) {
    throw ConfigError("simulate needs exactly one of --scenario or --spec");
  }
  ShiftSpec spec = spec_file.empty() ? scenario(scenario_name) : load_shift_spec(spec_file);
  if (seed) spec.seed = *seed;
  const auto world = sample_world(spec, n_train, n_test);

  LogitDataset both;
  both.provenance = world.test.provenance;
  both.records = world.train.records;
  both.records.insert(both.records.end(), world.test.records.begin(), world.test.records.end());
  const auto fmt = format.empty() ? (out.empty() ? DataFormat::csv : format_from_path(out))
                                  : parse_format(format);
  if (out.empty()) {
    write_dataset(std::cout, both, fmt);
    return 0;
  }
  write_dataset(out, both, fmt);
  const auto acc = default_threshold_accuracy(world);
  ojson summary;
  summary["scenario"] = spec.name;
  summary["records"] = both.size();
  summary["delta"] = world.derived.delta;
  summary["delta_prime"] = world.derived.delta_prime;
  summary["bayes_threshold_test"] = world.derived.bayes_threshold_test;
  summary["test_accuracy_at_zero"] = acc.at_zero;
  summary["test_accuracy_at_bayes"] = acc.at_bayes;
  std::cout << summary.dump(2) << '\n';
  return 0;
}

std::vector<std::size_t> sizes_or_default(const ExperimentConfig& cfg) {
  return cfg.sizes.empty() ? std::vector<std::size_t>{cfg.validation_size} : cfg.sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-hoc additive logit calibration for binary detectors"};
  app.require_subcommand(1);

  auto* calibrate = app.add_subcommand("calibrate", "fit alpha on one dataset and print it as JSON");
  std::string cal_input, cal_format, cal_method = "kde_supervised", cal_bandwidth, cal_out;
  std::uint64_t cal_seed = 0;
  std::optional<std::size_t> cal_val_size;
  double cal_gamma = 0.0;
  calibrate->add_option("--input", cal_input, "CSV or JSONL logit file")->required();
  calibrate->add_option("--format", cal_format, "csv or jsonl");
  calibrate->add_option("--method", cal_method, "calibration method");
  calibrate->add_option("--seed", cal_seed, "seed for --validation-size subsampling");
  calibrate->add_option("--validation-size", cal_val_size, "fit on a random subset of this size");
  calibrate->add_option("--bandwidth", cal_bandwidth, "silverman, scott or fixed:<h>");
  calibrate->add_option("--gamma", cal_gamma, "confidence weighting for kde_unsupervised");
  calibrate->add_option("--out", cal_out, "write the JSON here instead of stdout");

  auto* evaluate = app.add_subcommand("evaluate", "run a multi-seed calibration experiment");
  ExperimentFlags eval_flags;
  eval_flags.attach(evaluate, false);

  auto* sweep = app.add_subcommand("sweep", "validation-size sweep");
  ExperimentFlags sweep_flags;
  sweep_flags.attach(sweep, true);

  auto* compare = app.add_subcommand("compare", "compare supervised estimators of alpha");
  ExperimentFlags compare_flags;
  compare_flags.attach(compare, true);

  auto* simulate = app.add_subcommand("simulate", "sample a synthetic shifted logit world");
  std::string sim_scenario, sim_spec, sim_format, sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::size_t sim_train = 1000, sim_test = 10000;
  simulate->add_option("--scenario", sim_scenario, "no-shift, conditional-shift or joint-shift");
  simulate->add_option("--spec", sim_spec, "key = value shift spec file");
  simulate->add_option("--seed", sim_seed, "override the spec seed");
  simulate->add_option("--n-train", sim_train, "train logits");
  simulate->add_option("--n-test", sim_test, "test logits");
  simulate->add_option("--format", sim_format, "csv or jsonl");
  simulate->add_option("--out", sim_out, "output file (default stdout)");

  auto* plot = app.add_subcommand("plot", "re-render plots from a persisted report");
  std::string plot_report, plot_out;
  plot->add_option("--report", plot_report, "report.json from evaluate")->required();
  plot->add_option("--out", plot_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
  }

  try {
    if (*calibrate) {
      return run_calibrate(cal_input, cal_format, cal_method, cal_seed, cal_val_size,
                           cal_bandwidth, cal_gamma, cal_out);
    }
    if (*simulate) {
      return run_simulate(sim_scenario, sim_spec, sim_seed, sim_train, sim_test, sim_format,
                          sim_out);
    }
    if (*evaluate) {
      const auto cfg = eval_flags.resolve();
      const auto report = run_experiment(cfg);
      write_report(report, cfg.output_dir);
      emit_plots(report, cfg.output_dir);
      std::cout << format_table(report);
      return 0;
    }
    if (*sweep) {
      const auto cfg = sweep_flags.resolve();
      const auto report = validation_size_sweep(cfg, sizes_or_default(cfg));
      write_sweep(report, cfg.output_dir);
      std::cout << format_table(report);
      return 0;
    }
    if (*compare) {
      const auto cfg = compare_flags.resolve();
      const auto report = method_comparison(cfg, sizes_or_default(cfg));
      write_comparison(report, cfg.output_dir);
      std::cout << format_table(report);
      return 0;
    }
    if (*plot) {
      const auto report = read_report(plot_report);
      for (const auto& path : emit_plots(report, plot_out)) std::cout << path.string() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  }
  return 0;
}
