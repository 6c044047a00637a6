#include "logitcal/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "logitcal/calibrate_supervised.hpp"
#include "logitcal/calibrate_unsupervised.hpp"
#include "logitcal/errors.hpp"

namespace logitcal {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent RNG stream per (seed, source, sampling mode) work item.
std::uint64_t item_seed(std::uint64_t seed, std::size_t source_index, Sampling mode) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5157ULL + 2 * source_index +
                                                  (mode == Sampling::stratified ? 1 : 0)));
}

ojson number_or_null(double v) {
  return std::isfinite(v) ? ojson(v) : ojson(nullptr);
}

double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

ojson to_json(const Summary& s) {
  ojson j;
  j["mean"] = number_or_null(s.mean);
  j["std"] = number_or_null(s.std);
  return j;
}

Summary summary_from_json(const nlohmann::json& j) {
  return {number_or_nan(j.at("mean")), number_or_nan(j.at("std"))};
}

ojson to_json(const DensityEstimate& d) {
  ojson j;
  j["bandwidth"] = d.bandwidth();
  j["sample_count"] = d.sample_count();
  j["grid"] = std::vector<double>(d.grid().begin(), d.grid().end());
  j["density"] = std::vector<double>(d.density().begin(), d.density().end());
  return j;
}

DensityEstimate density_from_json(const nlohmann::json& j) {
  return DensityEstimate(j.at("grid").get<std::vector<double>>(),
                         j.at("density").get<std::vector<double>>(),
                         j.at("bandwidth").get<double>(),
                         j.at("sample_count").get<std::size_t>());
}

// Labeled records of `ds` without the "at least one label" precondition.
ClassSplit labeled_part(const LogitDataset& ds) {
  ClassSplit split;
  for (const auto& r : ds.records) {
    if (!r.label) ++split.unlabeled;
    else if (*r.label == Label::real) split.reals.push_back(r.logit);
    else split.fakes.push_back(r.logit);
  }
  return split;
}

double accuracy_or_nan(const ClassSplit& split, double alpha) {
  return split.labeled() == 0 ? kNaN : accuracy(split, alpha);
}

Sampling resolve_sampling(Sampling configured, Method m) {
  if (configured != Sampling::automatic) return configured;
  return is_supervised(m) ? Sampling::stratified : Sampling::uniform;
}

double fit_alpha(Method method, const LogitDataset& validation,
                 const ExperimentConfig& config, std::uint64_t seed) {
  switch (method) {
    case Method::kde_supervised: {
      const auto split = labeled_part(validation);
      return calibrate_supervised(split.reals, split.fakes, config.kde, config.class_bandwidth).alpha;
    }
    case Method::kde_unsupervised: {
      const auto logits = validation.logits();
      const auto density = estimate_density(logits, config.kde);
      return confidence_weighted_alpha(logits, density, config.gamma).alpha;
    }
    case Method::binary_search:
      return binary_search_threshold(labeled_part(validation)).alpha;
    case Method::offset_training:
      return train_offset(labeled_part(validation), config.offset, seed).alpha;
    case Method::threshold_oracle: {
      const auto split = labeled_part(validation);
      if (split.reals.empty() || split.fakes.empty()) {
        throw DegenerateInputError("threshold oracle needs both classes");
      }
      return best_threshold_sweep(split).alpha;
    }
  }
  throw ConfigError("unhandled method");
}

std::string pct(const Summary& s) {
  if (!std::isfinite(s.mean)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * s.mean, 100.0 * s.std);
  return buf;
}

std::string plain(const Summary& s) {
  if (!std::isfinite(s.mean)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f ± %.4f", s.mean, s.std);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  // Counts UTF-8 code points so the "±" sign does not skew columns.
  std::size_t visible = 0;
  for (unsigned char c : s) visible += (c & 0xC0) != 0x80 ? 1 : 0;
  return visible >= width ? s + " " : s + std::string(width - visible, ' ');
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "unnamed" : out;
}

std::string fmt(double v, int decimals = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kde_supervised: return "kde_supervised";
    case Method::kde_unsupervised: return "kde_unsupervised";
    case Method::binary_search: return "binary_search";
    case Method::offset_training: return "offset_training";
    case Method::threshold_oracle: return "threshold_oracle";
  }
  return "kde_supervised";
}

Method parse_method(const std::string& name) {
  for (auto m : {Method::kde_supervised, Method::kde_unsupervised, Method::binary_search,
                 Method::offset_training, Method::threshold_oracle}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name +
                    "' (expected kde_supervised, kde_unsupervised, binary_search, "
                    "offset_training or threshold_oracle)");
}

bool is_supervised(Method m) { return m != Method::kde_unsupervised; }

std::string to_string(Sampling s) {
  switch (s) {
    case Sampling::automatic: return "auto";
    case Sampling::stratified: return "stratified";
    case Sampling::uniform: return "uniform";
  }
  return "auto";
}

Sampling parse_sampling(const std::string& name) {
  if (name == "auto") return Sampling::automatic;
  if (name == "stratified") return Sampling::stratified;
  if (name == "uniform") return Sampling::uniform;
  throw ConfigError("unknown sampling mode '" + name + "' (expected auto, stratified or uniform)");
}

void ExperimentConfig::validate() const {
  if (input.empty()) throw ConfigError("no input given");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (validation_size < 1) throw ConfigError("validation size must be at least 1");
  if (n_test < 2) throw ConfigError("n_test must be at least 2");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  kde.validate();
  offset.validate();
}

ExperimentConfig config_from_kv(const KeyValueConfig& kv, ExperimentConfig base) {
  kv.reject_unknown({"input", "format", "methods", "method", "validation_size", "seeds",
                     "seed", "bandwidth", "class_bandwidth", "grid_size", "grid_pad", "bandwidth_floor",
                     "output_dir", "out", "sampling", "gamma", "offset_steps",
                     "offset_step_size", "offset_init", "n_test", "sizes"});
  auto first = [&](std::initializer_list<const char*> keys) -> const char* {
    for (const char* k : keys) {
      if (kv.has(k)) return k;
    }
    return nullptr;
  };
  if (kv.has("input")) base.input = kv.get("input");
  if (kv.has("format")) base.format = parse_format(kv.get("format"));
  if (const char* k = first({"methods", "method"})) {
    base.methods.clear();
    for (const auto& m : kv.get_list(k)) base.methods.push_back(parse_method(m));
  }
  if (kv.has("validation_size")) base.validation_size = kv.get_uint("validation_size");
  if (const char* k = first({"seeds", "seed"})) {
    base.seeds.clear();
    for (const auto& s : kv.get_list(k)) base.seeds.push_back(parse_uint(s, k));
  }
  if (kv.has("bandwidth")) base.kde.bandwidth = BandwidthRule::parse(kv.get("bandwidth"));
  if (kv.has("class_bandwidth")) {
    base.class_bandwidth = parse_class_bandwidth(kv.get("class_bandwidth"));
  }
  if (kv.has("grid_size")) base.kde.grid_size = kv.get_uint("grid_size");
  if (kv.has("grid_pad")) base.kde.grid_pad = kv.get_double("grid_pad");
  if (kv.has("bandwidth_floor")) base.kde.bandwidth_floor = kv.get_double("bandwidth_floor");
  if (const char* k = first({"output_dir", "out"})) base.output_dir = kv.get(k);
  if (kv.has("sampling")) base.sampling = parse_sampling(kv.get("sampling"));
  if (kv.has("gamma")) base.gamma = kv.get_double("gamma");
  if (kv.has("offset_steps")) base.offset.steps = kv.get_uint("offset_steps");
  if (kv.has("offset_step_size")) base.offset.initial_step_size = kv.get_double("offset_step_size");
  if (kv.has("offset_init")) {
    const auto& v = kv.get("offset_init");
    if (v == "class_midpoint") base.offset.init = OffsetInit::class_midpoint;
    else if (v == "zero") base.offset.init = OffsetInit::zero;
    else throw ConfigError("offset_init must be class_midpoint or zero");
  }
  if (kv.has("n_test")) base.n_test = kv.get_uint("n_test");
  if (kv.has("sizes")) {
    base.sizes.clear();
    for (const auto& s : kv.get_list("sizes")) base.sizes.push_back(parse_uint(s, "sizes"));
  }
  return base;
}

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["input"] = c.input;
  j["format"] = c.format ? ojson(*c.format == DataFormat::csv ? "csv" : "jsonl")
                         : ojson(nullptr);
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["validation_size"] = c.validation_size;
  j["seeds"] = c.seeds;
  j["kde"] = {{"bandwidth", c.kde.bandwidth.to_string()},
              {"grid_size", c.kde.grid_size},
              {"grid_pad", c.kde.grid_pad},
              {"bandwidth_floor", c.kde.bandwidth_floor},
              {"class_bandwidth", to_string(c.class_bandwidth)}};
  j["sampling"] = to_string(c.sampling);
  j["gamma"] = c.gamma;
  j["offset"] = {{"steps", c.offset.steps},
                 {"initial_step_size", c.offset.initial_step_size},
                 {"init", c.offset.init == OffsetInit::zero ? "zero" : "class_midpoint"}};
  j["n_test"] = c.n_test;
  return j;
}

ExperimentInput load_input(const ExperimentConfig& config) {
  ExperimentInput in;
  const std::filesystem::path path(config.input);
  std::optional<ShiftSpec> spec;
  if (is_scenario(config.input)) spec = scenario(config.input);
  else if (path.extension() == ".spec") spec = load_shift_spec(path);

  if (spec) {
    in.world = sample_world(*spec, 1000, config.n_test);
    in.data = in.world->test;
  } else {
    in.data = parse_dataset(path, config.format.value_or(format_from_path(path)));
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < in.data.records.size(); ++i) {
    auto& r = in.data.records[i];
    if (!r.id) r.id = "row-" + std::to_string(i);
    if (!seen.insert(*r.id).second) {
      throw DataError(in.data.provenance + ": duplicate record id '" + *r.id + "'");
    }
  }
  return in;
}

Summary summarize(const std::vector<double>& values) {
  std::vector<double> kept;
  for (double v : values) {
    if (!std::isnan(v)) kept.push_back(v);
  }
  if (kept.empty()) return {kNaN, kNaN};
  // Deviations are taken from the first value so identical inputs give an
  // exact zero spread.
  const double pivot = kept.front();
  double shift = 0.0;
  for (double v : kept) shift += v - pivot;
  const auto n = static_cast<double>(kept.size());
  shift /= n;
  const double mean = pivot + shift;
  if (kept.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : kept) ss += (v - pivot - shift) * (v - pivot - shift);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::vector<AggregateRow> aggregate(const std::vector<SeedRow>& rows) {
  std::vector<std::pair<std::string, Method>> keys;
  for (const auto& r : rows) {
    const std::pair key{r.source, r.method};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<AggregateRow> out;
  for (const auto& [source, method] : keys) {
    std::vector<double> alpha, before, after, delta, val;
    for (const auto& r : rows) {
      if (r.source != source || r.method != method) continue;
      alpha.push_back(r.alpha);
      before.push_back(r.accuracy_before);
      after.push_back(r.accuracy_after);
      delta.push_back(r.accuracy_after - r.accuracy_before);
      val.push_back(r.validation_accuracy);
    }
    AggregateRow a;
    a.source = source;
    a.method = method;
    a.runs = alpha.size();
    a.alpha = summarize(alpha);
    a.accuracy_before = summarize(before);
    a.accuracy_after = summarize(after);
    a.delta = summarize(delta);
    a.validation_accuracy = summarize(val);
    out.push_back(std::move(a));
  }
  return out;
}

EvalReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  return run_experiment(config, load_input(config));
}

EvalReport run_experiment(const ExperimentConfig& config, const ExperimentInput& input) {
  config.validate();
  EvalReport report;
  report.config = to_json(config);
  if (input.world) report.bayes_threshold = input.world->derived.bayes_threshold_test;

  const auto sources = group_by_source(input.data);
  const bool any_supervised =
      std::any_of(config.methods.begin(), config.methods.end(), is_supervised);

  for (std::size_t si = 0; si < sources.size(); ++si) {
    const auto& [source, pool] = sources[si];
    const auto pool_split = labeled_part(pool);
    if (any_supervised && pool_split.labeled() == 0) {
      throw DataError("supervised method requested on unlabeled source '" + source + "'");
    }
    if (config.validation_size > pool.size()) {
      throw ConfigError("validation size " + std::to_string(config.validation_size) +
                        " exceeds the " + std::to_string(pool.size()) +
                        " records of source '" + source + "'");
    }

    SourceCurves curves;
    curves.source = source;
    if (!pool_split.reals.empty()) curves.real = estimate_density(pool_split.reals, config.kde);
    if (!pool_split.fakes.empty()) curves.fake = estimate_density(pool_split.fakes, config.kde);
    if (pool_split.labeled() == 0) curves.pooled = estimate_density(pool.logits(), config.kde);
    report.curves.push_back(std::move(curves));

    for (std::uint64_t seed : config.seeds) {
      std::map<Sampling, ValidationSplit> subsets;
      for (Method method : config.methods) {
        const Sampling mode = resolve_sampling(config.sampling, method);
        auto it = subsets.find(mode);
        if (it == subsets.end()) {
          it = subsets
                   .emplace(mode, subsample_validation(pool, config.validation_size,
                                                       item_seed(seed, si, mode),
                                                       mode == Sampling::stratified))
                   .first;
        }
        const auto& [validation, rest] = it->second;

        SeedRow row;
        row.source = source;
        row.method = method;
        row.seed = seed;
        row.alpha = fit_alpha(method, validation, config, seed);
        const auto test_split = labeled_part(rest);
        row.accuracy_before = accuracy_or_nan(test_split, 0.0);
        row.accuracy_after = accuracy_or_nan(test_split, row.alpha);
        row.validation_accuracy = accuracy_or_nan(labeled_part(validation), row.alpha);
        row.test_count = test_split.labeled();
        for (const auto& r : validation.records) row.validation_ids.push_back(*r.id);
        for (const auto& r : rest.records) row.test_ids.push_back(*r.id);
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.aggregates = aggregate(report.rows);
  return report;
}

ojson to_json(const EvalReport& report) {
  ojson j;
  j["config"] = report.config;
  j["bayes_threshold"] = report.bayes_threshold ? ojson(*report.bayes_threshold) : ojson(nullptr);
  ojson rows = ojson::array();
  for (const auto& r : report.rows) {
    ojson row;
    row["source"] = r.source;
    row["method"] = to_string(r.method);
    row["seed"] = r.seed;
    row["alpha"] = r.alpha;
    row["accuracy_before"] = number_or_null(r.accuracy_before);
    row["accuracy_after"] = number_or_null(r.accuracy_after);
    row["validation_accuracy"] = number_or_null(r.validation_accuracy);
    row["test_count"] = r.test_count;
    row["validation_ids"] = r.validation_ids;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  ojson aggs = ojson::array();
  for (const auto& a : report.aggregates) {
    ojson agg;
    agg["source"] = a.source;
    agg["method"] = to_string(a.method);
    agg["runs"] = a.runs;
    agg["alpha"] = to_json(a.alpha);
    agg["accuracy_before"] = to_json(a.accuracy_before);
    agg["accuracy_after"] = to_json(a.accuracy_after);
    agg["delta"] = to_json(a.delta);
    agg["validation_accuracy"] = to_json(a.validation_accuracy);
    aggs.push_back(std::move(agg));
  }
  j["aggregates"] = std::move(aggs);
  ojson curves = ojson::array();
  for (const auto& c : report.curves) {
    ojson cj;
    cj["source"] = c.source;
    cj["real"] = c.real ? to_json(*c.real) : ojson(nullptr);
    cj["fake"] = c.fake ? to_json(*c.fake) : ojson(nullptr);
    cj["pooled"] = c.pooled ? to_json(*c.pooled) : ojson(nullptr);
    curves.push_back(std::move(cj));
  }
  j["curves"] = std::move(curves);
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport report;
    report.config = j.at("config");
    if (!j.at("bayes_threshold").is_null()) {
      report.bayes_threshold = j.at("bayes_threshold").get<double>();
    }
    for (const auto& rj : j.at("rows")) {
      SeedRow r;
      r.source = rj.at("source").get<std::string>();
      r.method = parse_method(rj.at("method").get<std::string>());
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.alpha = rj.at("alpha").get<double>();
      r.accuracy_before = number_or_nan(rj.at("accuracy_before"));
      r.accuracy_after = number_or_nan(rj.at("accuracy_after"));
      r.validation_accuracy = number_or_nan(rj.at("validation_accuracy"));
      r.test_count = rj.at("test_count").get<std::size_t>();
      r.validation_ids = rj.at("validation_ids").get<std::vector<std::string>>();
      report.rows.push_back(std::move(r));
    }
    for (const auto& aj : j.at("aggregates")) {
      AggregateRow a;
      a.source = aj.at("source").get<std::string>();
      a.method = parse_method(aj.at("method").get<std::string>());
      a.runs = aj.at("runs").get<std::size_t>();
      a.alpha = summary_from_json(aj.at("alpha"));
      a.accuracy_before = summary_from_json(aj.at("accuracy_before"));
      a.accuracy_after = summary_from_json(aj.at("accuracy_after"));
      a.delta = summary_from_json(aj.at("delta"));
      a.validation_accuracy = summary_from_json(aj.at("validation_accuracy"));
      report.aggregates.push_back(std::move(a));
    }
    for (const auto& cj : j.at("curves")) {
      SourceCurves c;
      c.source = cj.at("source").get<std::string>();
      if (!cj.at("real").is_null()) c.real = density_from_json(cj.at("real"));
      if (!cj.at("fake").is_null()) c.fake = density_from_json(cj.at("fake"));
      if (!cj.at("pooled").is_null()) c.pooled = density_from_json(cj.at("pooled"));
      report.curves.push_back(std::move(c));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

std::string format_table(const EvalReport& report) {
  std::ostringstream os;
  os << "input: " << report.config.value("input", std::string{})
     << "  validation size: " << report.config.value("validation_size", 0)
     << "  seeds: " << report.config.value("seeds", ojson::array()).size() << '\n';
  if (report.bayes_threshold) {
    os << "analytic Bayes threshold: " << fmt(*report.bayes_threshold, 4) << '\n';
  }
  os << '\n'
     << pad_right("source", 18) << pad_right("method", 20) << pad_right("alpha", 20)
     << pad_right("acc@0 (%)", 18) << pad_right("acc@alpha (%)", 18) << "delta (%)\n";
  for (const auto& a : report.aggregates) {
    os << pad_right(a.source, 18) << pad_right(to_string(a.method), 20)
       << pad_right(plain(a.alpha), 20) << pad_right(pct(a.accuracy_before), 18)
       << pad_right(pct(a.accuracy_after), 18) << pct(a.delta) << '\n';
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(report).dump(1) + "\n");
  write_text(dir / "report.txt", format_table(report));
}

EvalReport read_report(const std::filesystem::path& report_json) {
  std::ifstream in(report_json);
  if (!in) throw DataError("cannot open " + report_json.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(report_json.string() + ": " + e.what());
  }
  return report_from_json(j);
}

SweepReport validation_size_sweep(const ExperimentConfig& config,
                                  const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw ConfigError("sweep needs at least one validation size");
  config.validate();
  const auto input = load_input(config);
  SweepReport sweep;
  sweep.sizes = sizes;
  for (std::size_t size : sizes) {
    auto cfg = config;
    cfg.validation_size = size;
    const auto report = run_experiment(cfg, input);
    for (const auto& a : report.aggregates) {
      sweep.rows.push_back({size, a.source, a.method, a.runs, a.accuracy_after, a.alpha});
    }
  }
  return sweep;
}

ojson to_json(const SweepReport& report) {
  ojson j;
  j["sizes"] = report.sizes;
  ojson rows = ojson::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"size", r.size},
                    {"source", r.source},
                    {"method", to_string(r.method)},
                    {"runs", r.runs},
                    {"accuracy_after", to_json(r.accuracy_after)},
                    {"alpha", to_json(r.alpha)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string format_table(const SweepReport& report) {
  std::ostringstream os;
  os << pad_right("size", 8) << pad_right("source", 18) << pad_right("method", 20)
     << pad_right("acc@alpha (%)", 18) << "alpha\n";
  for (const auto& r : report.rows) {
    os << pad_right(std::to_string(r.size), 8) << pad_right(r.source, 18)
       << pad_right(to_string(r.method), 20) << pad_right(pct(r.accuracy_after), 18)
       << plain(r.alpha) << '\n';
  }
  return os.str();
}

void write_sweep(const SweepReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "sweep.json", to_json(report).dump(1) + "\n");
  write_text(dir / "sweep.txt", format_table(report));
}

ComparisonReport method_comparison(const ExperimentConfig& config,
                                   const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw ConfigError("comparison needs at least one validation size");
  std::vector<Method> methods;
  for (auto m : config.methods) {
    if (m != Method::threshold_oracle &&
        std::find(methods.begin(), methods.end(), m) == methods.end()) {
      methods.push_back(m);
    }
  }
  if (methods.size() < 2) throw ConfigError("comparison needs at least two methods");
  config.validate();
  const auto input = load_input(config);
  if (labeled_part(input.data).labeled() == 0) {
    throw DataError("method comparison needs labeled input");
  }
  auto cfg = config;
  cfg.methods = methods;
  cfg.methods.push_back(Method::threshold_oracle);

  ComparisonReport out;
  out.sizes = sizes;
  for (std::size_t size : sizes) {
    cfg.validation_size = size;
    auto report = run_experiment(cfg, input);
    for (const auto& a : report.aggregates) {
      out.rows.push_back({size, a.source, a.method, a.runs, a.accuracy_after,
                          a.validation_accuracy});
    }
    for (auto& r : report.rows) {
      r.test_ids.clear();
      out.seed_rows.push_back(std::move(r));
    }
  }
  return out;
}

ojson to_json(const ComparisonReport& report) {
  ojson j;
  j["sizes"] = report.sizes;
  ojson rows = ojson::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"size", r.size},
                    {"source", r.source},
                    {"method", to_string(r.method)},
                    {"runs", r.runs},
                    {"test_accuracy", to_json(r.test_accuracy)},
                    {"validation_accuracy", to_json(r.validation_accuracy)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string format_table(const ComparisonReport& report) {
  std::ostringstream os;
  os << pad_right("size", 8) << pad_right("source", 18) << pad_right("method", 20)
     << pad_right("test acc (%)", 18) << "validation acc (%)\n";
  for (const auto& r : report.rows) {
    os << pad_right(std::to_string(r.size), 8) << pad_right(r.source, 18)
       << pad_right(to_string(r.method), 20) << pad_right(pct(r.test_accuracy), 18)
       << pct(r.validation_accuracy) << '\n';
  }
  return os.str();
}

void write_comparison(const ComparisonReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "comparison.json", to_json(report).dump(1) + "\n");
  write_text(dir / "comparison.txt", format_table(report));
}

std::string render_svg(const SourceCurves& curves,
                       const std::vector<std::pair<std::string, double>>& thresholds) {
  constexpr double width = 720.0, height = 420.0;
  constexpr double left = 60.0, right = 200.0, top = 30.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  struct Curve {
    const DensityEstimate* d;
    const char* label;
    const char* colour;
  };
  std::vector<Curve> drawn;
  if (curves.real) drawn.push_back({&*curves.real, "real (y=0)", "#1f77b4"});
  if (curves.fake) drawn.push_back({&*curves.fake, "fake (y=1)", "#d62728"});
  if (curves.pooled) drawn.push_back({&*curves.pooled, "all logits", "#555555"});

  double xmin = 0.0, xmax = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto& c : drawn) {
    xmin = first ? c.d->lo() : std::min(xmin, c.d->lo());
    xmax = first ? c.d->hi() : std::max(xmax, c.d->hi());
    first = false;
    for (double p : c.d->density()) ymax = std::max(ymax, p);
  }
  if (first) {
    xmin = -1.0;
    xmax = 1.0;
  }
  for (const auto& [name, alpha] : thresholds) {
    xmin = std::min(xmin, alpha);
    xmax = std::max(xmax, alpha);
  }
  xmin = std::min(xmin, 0.0);
  xmax = std::max(xmax, 0.0);
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.05;

  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto sy = [&](double y) { return top + plot_h - y / ymax * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0)
     << "\" height=\"" << fmt(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(left) << "\" y=\"18\" font-size=\"14\">logit densities: "
     << curves.source << "</text>\n";
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(plot_w)
     << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    os << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(top + plot_h + 18)
       << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 10)
     << "\" text-anchor=\"middle\">logit z</text>\n";

  for (const auto& c : drawn) {
    os << "<polyline fill=\"none\" stroke=\"" << c.colour << "\" stroke-width=\"1.5\" points=\"";
    const auto g = c.d->grid();
    const auto p = c.d->density();
    for (std::size_t j = 0; j < g.size(); ++j) {
      os << (j ? " " : "") << fmt(sx(g[j])) << ',' << fmt(sy(p[j]));
    }
    os << "\"/>\n";
  }

  static const char* palette[] = {"#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  double legend_y = top + 10;
  const double legend_x = left + plot_w + 15;
  auto legend = [&](const std::string& text, const char* colour, bool dashed) {
    os << "<line x1=\"" << fmt(legend_x) << "\" y1=\"" << fmt(legend_y) << "\" x2=\""
       << fmt(legend_x + 20) << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << colour
       << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    os << "<text x=\"" << fmt(legend_x + 26) << "\" y=\"" << fmt(legend_y + 4) << "\">" << text
       << "</text>\n";
    legend_y += 18;
  };
  auto vline = [&](double x, const char* colour, bool dashed) {
    os << "<line x1=\"" << fmt(sx(x)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(sx(x))
       << "\" y2=\"" << fmt(top + plot_h) << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
       << (dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
  };

  for (const auto& c : drawn) legend(c.label, c.colour, false);
  vline(0.0, "black", true);
  legend("original threshold (0)", "black", true);
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const char* colour = palette[i % std::size(palette)];
    vline(thresholds[i].second, colour, false);
    legend(thresholds[i].first + " (" + fmt(thresholds[i].second, 3) + ")", colour, false);
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(const EvalReport& report,
                                              const std::filesystem::path& dir) {
  std::set<std::string> curve_sources, row_sources;
  for (const auto& c : report.curves) curve_sources.insert(c.source);
  for (const auto& a : report.aggregates) row_sources.insert(a.source);
  for (const auto& s : row_sources) {
    if (!curve_sources.count(s)) throw DataError("no densities for source '" + s + "'");
  }
  for (const auto& s : curve_sources) {
    if (!row_sources.count(s)) throw DataError("no report rows for source '" + s + "'");
  }

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& c : report.curves) {
    std::vector<std::pair<std::string, double>> thresholds;
    for (const auto& a : report.aggregates) {
      if (a.source == c.source) thresholds.emplace_back(to_string(a.method), a.alpha.mean);
    }
    const auto path = dir / ("plot_" + sanitize(c.source) + ".svg");
    write_text(path, render_svg(c, thresholds));
    written.push_back(path);
  }

  write_text(dir / "summary.txt", format_table(report));
  written.push_back(dir / "summary.txt");
  std::ostringstream csv;
  csv.precision(17);
  csv << "source,method,runs,alpha_mean,alpha_std,accuracy_before_mean,accuracy_before_std,"
         "accuracy_after_mean,accuracy_after_std,delta_mean,delta_std\n";
  for (const auto& a : report.aggregates) {
    csv << a.source << ',' << to_string(a.method) << ',' << a.runs << ',' << a.alpha.mean << ','
        << a.alpha.std << ',' << a.accuracy_before.mean << ',' << a.accuracy_before.std << ','
        << a.accuracy_after.mean << ',' << a.accuracy_after.std << ',' << a.delta.mean << ','
        << a.delta.std << '\n';
  }
  write_text(dir / "summary.csv", csv.str());
  written.push_back(dir / "summary.csv");
  return written;
}

}  // namespace logitcal
