#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace logitcal {

enum class Label : std::uint8_t { real = 0, fake = 1 };

// One detector output. `logit` is f(x) on the log-odds scale; positive
// favours "fake" under the default decision rule.
struct LogitRecord {
  double logit = 0.0;
  std::optional<Label> label;
  std::string source;
  std::optional<std::string> id;

  friend bool operator==(const LogitRecord&, const LogitRecord&) = default;
};

// Ordered records plus where they came from. Order is file order.
struct LogitDataset {
  std::vector<LogitRecord> records;
  std::string provenance;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  std::vector<double> logits() const;

  friend bool operator==(const LogitDataset&, const LogitDataset&) = default;
};

struct ClassSplit {
  std::vector<double> reals;  // label 0
  std::vector<double> fakes;  // label 1
  std::size_t unlabeled = 0;

  std::size_t labeled() const noexcept { return reals.size() + fakes.size(); }
};

enum class DataFormat { csv, jsonl };

DataFormat parse_format(const std::string& name);
// Guesses from the file extension; `.jsonl`/`.ndjson` are JSONL, all else CSV.
DataFormat format_from_path(const std::filesystem::path& path);

// Throws DataError on a missing file, malformed row (message carries the
// 1-based line number), non-finite logit, or label outside {0,1}.
LogitDataset parse_dataset(const std::filesystem::path& path, DataFormat format);
LogitDataset parse_dataset(std::istream& in, DataFormat format,
                           std::string provenance);

void write_dataset(std::ostream& out, const LogitDataset& ds, DataFormat format);
void write_dataset(const std::filesystem::path& path, const LogitDataset& ds,
                   DataFormat format);

ClassSplit split_by_label(const LogitDataset& ds);

struct ValidationSplit {
  LogitDataset validation;
  LogitDataset rest;
};

// Draws exactly `n` records without replacement. Both halves keep file
// order. Stratified mode takes floor(n/2) reals and ceil(n/2) fakes.
ValidationSplit subsample_validation(const LogitDataset& ds, std::size_t n,
                                     std::uint64_t seed, bool stratified);

double median(std::span<const double> values);

struct ClassMedians {
  double real;
  double fake;
};

ClassMedians median_by_class(const ClassSplit& split);

// Groups records by source tag, preserving the order of first appearance.
std::vector<std::pair<std::string, LogitDataset>> group_by_source(
    const LogitDataset& ds);

}  // namespace logitcal
