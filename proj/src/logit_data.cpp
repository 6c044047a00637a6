#include "logitcal/logit_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "logitcal/errors.hpp"

namespace logitcal {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void fail(const std::string& provenance, std::size_t line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << provenance << ": line " << line << ": " << what;
  throw DataError(msg.str());
}

double checked_logit(std::optional<double> v, const std::string& provenance,
                     std::size_t line) {
  if (!v) fail(provenance, line, "logit is not a number");
  if (!std::isfinite(*v)) fail(provenance, line, "logit is not finite");
  return *v;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Column positions for CSV; -1 when absent.
struct CsvColumns {
  int logit = 0;
  int label = 1;
  int source = 2;
  int id = 3;
  std::size_t max_fields = 4;
};

CsvColumns columns_from_header(const std::vector<std::string_view>& header,
                               const std::string& provenance) {
  CsvColumns cols{-1, -1, -1, -1, header.size()};
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = header[i];
    const int idx = static_cast<int>(i);
    if (name == "logit") cols.logit = idx;
    else if (name == "label") cols.label = idx;
    else if (name == "source") cols.source = idx;
    else if (name == "id") cols.id = idx;
    else fail(provenance, 1, "unknown column '" + std::string(name) + "'");
  }
  if (cols.logit < 0) fail(provenance, 1, "header lacks a 'logit' column");
  return cols;
}

LogitDataset parse_csv(std::istream& in, std::string provenance) {
  LogitDataset ds;
  ds.provenance = std::move(provenance);
  CsvColumns cols;
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (first_content) {
      first_content = false;
      // from_chars accepts "nan"/"inf", so those rows are not mistaken for a
      // header and get rejected as non-finite below.
      if (!parse_number(fields.front())) {
        cols = columns_from_header(fields, ds.provenance);
        continue;
      }
    }
    if (fields.size() > cols.max_fields) {
      fail(ds.provenance, line_no, "too many fields");
    }
    auto field = [&](int idx) -> std::string_view {
      if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size()) return {};
      return fields[static_cast<std::size_t>(idx)];
    };
    LogitRecord rec;
    rec.logit = checked_logit(parse_number(field(cols.logit)), ds.provenance,
                              line_no);
    const auto label = field(cols.label);
    if (label == "0") rec.label = Label::real;
    else if (label == "1") rec.label = Label::fake;
    else if (!label.empty()) {
      fail(ds.provenance, line_no,
           "label '" + std::string(label) + "' is not 0 or 1");
    }
    rec.source = std::string(field(cols.source));
    if (const auto id = field(cols.id); !id.empty()) rec.id = std::string(id);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

LogitDataset parse_jsonl(std::istream& in, std::string provenance) {
  using nlohmann::json;
  LogitDataset ds;
  ds.provenance = std::move(provenance);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      fail(ds.provenance, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail(ds.provenance, line_no, "expected an object");
    LogitRecord rec;
    const auto logit = obj.find("logit");
    if (logit == obj.end() || !logit->is_number()) {
      fail(ds.provenance, line_no, "missing numeric 'logit'");
    }
    rec.logit = checked_logit(logit->get<double>(), ds.provenance, line_no);
    if (const auto label = obj.find("label");
        label != obj.end() && !label->is_null()) {
      if (!label->is_number_integer()) {
        fail(ds.provenance, line_no, "label is not 0 or 1");
      }
      const auto v = label->get<long long>();
      if (v != 0 && v != 1) fail(ds.provenance, line_no, "label is not 0 or 1");
      rec.label = v == 1 ? Label::fake : Label::real;
    }
    if (const auto source = obj.find("source"); source != obj.end()) {
      if (!source->is_string()) {
        fail(ds.provenance, line_no, "source is not a string");
      }
      rec.source = source->get<std::string>();
    }
    if (const auto id = obj.find("id"); id != obj.end() && !id->is_null()) {
      if (!id->is_string()) fail(ds.provenance, line_no, "id is not a string");
      rec.id = id->get<std::string>();
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

std::vector<double> LogitDataset::logits() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.logit);
  return out;
}

DataFormat parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "jsonl") return DataFormat::jsonl;
  throw ConfigError("unknown data format '" + name + "' (expected csv or jsonl)");
}

DataFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return DataFormat::jsonl;
  return DataFormat::csv;
}

LogitDataset parse_dataset(std::istream& in, DataFormat format,
                           std::string provenance) {
  auto ds = format == DataFormat::csv ? parse_csv(in, std::move(provenance))
                                      : parse_jsonl(in, std::move(provenance));
  if (ds.empty()) throw DataError(ds.provenance + ": no records");
  return ds;
}

LogitDataset parse_dataset(const std::filesystem::path& path,
                           DataFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_dataset(in, format, path.string());
}

void write_dataset(std::ostream& out, const LogitDataset& ds,
                   DataFormat format) {
  if (format == DataFormat::csv) {
    out << "logit,label,source,id\n";
    for (const auto& r : ds.records) {
      out << format_double(r.logit) << ',';
      if (r.label) out << static_cast<int>(*r.label);
      out << ',' << r.source << ',' << r.id.value_or("") << '\n';
    }
    return;
  }
  for (const auto& r : ds.records) {
    nlohmann::ordered_json obj;
    obj["logit"] = r.logit;
    obj["label"] = r.label ? nlohmann::ordered_json(static_cast<int>(*r.label))
                           : nlohmann::ordered_json(nullptr);
    obj["source"] = r.source;
    if (r.id) obj["id"] = *r.id;
    out << obj.dump() << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const LogitDataset& ds,
                   DataFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset(out, ds, format);
}

ClassSplit split_by_label(const LogitDataset& ds) {
  ClassSplit split;
  for (const auto& r : ds.records) {
    if (!r.label) ++split.unlabeled;
    else if (*r.label == Label::real) split.reals.push_back(r.logit);
    else split.fakes.push_back(r.logit);
  }
  if (split.labeled() == 0) {
    throw DataError(ds.provenance + ": no labeled records");
  }
  return split;
}

ValidationSplit subsample_validation(const LogitDataset& ds, std::size_t n,
                                     std::uint64_t seed, bool stratified) {
  const std::size_t total = ds.size();
  if (n < 1 || n > total) {
    throw ConfigError("validation size " + std::to_string(n) +
                      " outside [1, " + std::to_string(total) + "]");
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> chosen(total, false);
  if (stratified) {
    std::vector<std::size_t> reals, fakes;
    for (std::size_t i = 0; i < total; ++i) {
      const auto& label = ds.records[i].label;
      if (!label) continue;
      (*label == Label::real ? reals : fakes).push_back(i);
    }
    if (reals.empty() || fakes.empty()) {
      throw DegenerateInputError(
          "stratified sampling needs both labels present in " + ds.provenance);
    }
    const std::size_t want_real = n / 2;
    const std::size_t want_fake = n - want_real;
    if (want_real > reals.size() || want_fake > fakes.size()) {
      throw ConfigError("validation size " + std::to_string(n) +
                        " needs " + std::to_string(want_real) + " real and " +
                        std::to_string(want_fake) + " fake records; have " +
                        std::to_string(reals.size()) + " and " +
                        std::to_string(fakes.size()));
    }
    std::shuffle(reals.begin(), reals.end(), rng);
    std::shuffle(fakes.begin(), fakes.end(), rng);
    for (std::size_t i = 0; i < want_real; ++i) chosen[reals[i]] = true;
    for (std::size_t i = 0; i < want_fake; ++i) chosen[fakes[i]] = true;
  } else {
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) chosen[order[i]] = true;
  }

  ValidationSplit out;
  out.validation.provenance = ds.provenance + "#validation";
  out.rest.provenance = ds.provenance + "#rest";
  out.validation.records.reserve(n);
  out.rest.records.reserve(total - n);
  for (std::size_t i = 0; i < total; ++i) {
    (chosen[i] ? out.validation : out.rest).records.push_back(ds.records[i]);
  }
  return out;
}

double median(std::span<const double> values) {
  if (values.empty()) throw DegenerateInputError("median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

ClassMedians median_by_class(const ClassSplit& split) {
  if (split.reals.empty() || split.fakes.empty()) {
    throw DegenerateInputError("class medians need both classes");
  }
  return {median(split.reals), median(split.fakes)};
}

std::vector<std::pair<std::string, LogitDataset>> group_by_source(
    const LogitDataset& ds) {
  std::vector<std::pair<std::string, LogitDataset>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : ds.records) {
    auto [it, inserted] = index.try_emplace(r.source, groups.size());
    if (inserted) {
      LogitDataset group;
      group.provenance = ds.provenance + "[" + r.source + "]";
      groups.emplace_back(r.source, std::move(group));
    }
    groups[it->second].second.records.push_back(r);
  }
  return groups;
}

}  // namespace logitcal
