#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logitcal/baselines.hpp"
#include "logitcal/calibrate_supervised.hpp"
#include "logitcal/kde.hpp"
#include "logitcal/kv_config.hpp"
#include "logitcal/logit_data.hpp"
#include "logitcal/shift_sim.hpp"

namespace logitcal {

enum class Method {
  kde_supervised,
  kde_unsupervised,
  binary_search,
  offset_training,
  // Exhaustive accuracy maximisation on the validation subset; the upper
  // bound row of method comparisons.
  threshold_oracle,
};

std::string to_string(Method m);
Method parse_method(const std::string& name);
bool is_supervised(Method m);

enum class Sampling {
  automatic,  // stratified for supervised methods, uniform otherwise
  stratified,
  uniform,
};

std::string to_string(Sampling s);
Sampling parse_sampling(const std::string& name);

struct ExperimentConfig {
  // Data file (CSV/JSONL), a catalog scenario name, or a `.spec` shift file.
  std::string input;
  std::optional<DataFormat> format;
  std::vector<Method> methods{Method::kde_supervised};
  std::size_t validation_size = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  KdeConfig kde;
  ClassBandwidth class_bandwidth = ClassBandwidth::pooled;
  std::filesystem::path output_dir = "out";
  Sampling sampling = Sampling::automatic;
  double gamma = 0.0;  // kde_unsupervised confidence weighting, 0 = closed form
  OffsetTrainingConfig offset;
  std::size_t n_test = 10000;  // simulated inputs only
  std::vector<std::size_t> sizes;  // sweep / compare

  void validate() const;
};

// Applies every recognised key of `kv` on top of `base`.
ExperimentConfig config_from_kv(const KeyValueConfig& kv, ExperimentConfig base = {});
nlohmann::ordered_json to_json(const ExperimentConfig& config);

struct ExperimentInput {
  LogitDataset data;  // every record carries an id
  std::optional<SyntheticWorld> world;
};

ExperimentInput load_input(const ExperimentConfig& config);

struct SeedRow {
  std::string source;
  Method method = Method::kde_supervised;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double accuracy_before = 0.0;  // alpha = 0 on the held-out records
  double accuracy_after = 0.0;
  double validation_accuracy = 0.0;  // NaN when the subset is unlabeled
  std::size_t test_count = 0;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

// NaN values are skipped; an all-NaN input yields NaN mean and std.
Summary summarize(const std::vector<double>& values);

struct AggregateRow {
  std::string source;
  Method method = Method::kde_supervised;
  std::size_t runs = 0;
  Summary alpha;
  Summary accuracy_before;
  Summary accuracy_after;
  Summary delta;
  Summary validation_accuracy;
};

struct SourceCurves {
  std::string source;
  std::optional<DensityEstimate> real;
  std::optional<DensityEstimate> fake;
  std::optional<DensityEstimate> pooled;  // only when the source is unlabeled
};

struct EvalReport {
  nlohmann::ordered_json config;
  std::optional<double> bayes_threshold;  // simulated inputs only
  std::vector<SeedRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<SourceCurves> curves;
};

std::vector<AggregateRow> aggregate(const std::vector<SeedRow>& rows);

// Per seed: draw the validation subset, fit every method on it alone and
// score alpha = 0 and the fitted alpha on the remaining records.
EvalReport run_experiment(const ExperimentConfig& config);
EvalReport run_experiment(const ExperimentConfig& config, const ExperimentInput& input);

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string format_table(const EvalReport& report);

// Writes report.json and report.txt under `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
EvalReport read_report(const std::filesystem::path& report_json);

struct SweepRow {
  std::size_t size = 0;
  std::string source;
  Method method = Method::kde_supervised;
  std::size_t runs = 0;
  Summary accuracy_after;
  Summary alpha;
};

struct SweepReport {
  std::vector<std::size_t> sizes;
  std::vector<SweepRow> rows;
};

SweepReport validation_size_sweep(const ExperimentConfig& config,
                                  const std::vector<std::size_t>& sizes);
nlohmann::ordered_json to_json(const SweepReport& report);
std::string format_table(const SweepReport& report);
void write_sweep(const SweepReport& report, const std::filesystem::path& dir);

struct ComparisonRow {
  std::size_t size = 0;
  std::string source;
  Method method = Method::kde_supervised;
  std::size_t runs = 0;
  Summary test_accuracy;
  Summary validation_accuracy;
};

struct ComparisonReport {
  std::vector<std::size_t> sizes;
  std::vector<ComparisonRow> rows;  // includes the threshold_oracle rows
  std::vector<SeedRow> seed_rows;
};

ComparisonReport method_comparison(const ExperimentConfig& config,
                                   const std::vector<std::size_t>& sizes);
nlohmann::ordered_json to_json(const ComparisonReport& report);
std::string format_table(const ComparisonReport& report);
void write_comparison(const ComparisonReport& report, const std::filesystem::path& dir);

// One SVG per source (real/fake KDE curves, a dashed line at alpha = 0 and a
// line per method at its mean alpha) plus summary.txt and summary.csv.
// Returns the files written, in a stable order.
std::vector<std::filesystem::path> emit_plots(const EvalReport& report,
                                              const std::filesystem::path& dir);
std::string render_svg(const SourceCurves& curves,
                       const std::vector<std::pair<std::string, double>>& thresholds);

}  // namespace logitcal
