#include "attentiv/dataset_io.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace attentiv {

std::vector<std::string> default_schema() {
  return {"subject_id", "video_id", "attention", "meditation", "raw",
          "delta",      "theta",    "alpha1",    "alpha2",     "beta1",
          "beta2",      "gamma1",   "gamma2",    "predefined_label", "user_label"};
}

std::vector<std::string> band_schema() {
  return {"subject_id", "video_id", "attention", "meditation", "raw",
          "delta",      "theta",    "alpha",     "beta",       "gamma",
          "predefined_label", "user_label"};
}

std::vector<std::string> band_feature_names() {
  std::vector<std::string> out;
  for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
    out.emplace_back(dsp::band_name(static_cast<dsp::BandId>(b)));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size() &&
         std::isfinite(out);
}

bool blank(std::string_view line) { return trim(line).empty(); }

// Reads the header and all records; line numbers in errors are 1-based
// file lines, row indices 0-based data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> values;
  std::size_t rows = 0;
};

CsvTable read_table(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) throw Error(ErrorKind::data, "file is empty");
  for (const auto f : split_fields(line)) {
    if (f.empty()) throw Error(ErrorKind::data, "empty column name in header");
    t.header.emplace_back(f);
  }
  for (std::size_t a = 0; a < t.header.size(); ++a) {
    for (std::size_t b = a + 1; b < t.header.size(); ++b) {
      if (t.header[a] == t.header[b]) {
        throw Error(ErrorKind::schema, "duplicate column '" + t.header[a] + "'");
      }
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != t.header.size()) {
      throw Error(ErrorKind::data,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()),
                  t.rows);
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw Error(ErrorKind::data,
                    "row " + std::to_string(t.rows) + ", column " + t.header[c] +
                        ": '" + std::string(fields[c]) + "' is not a finite number",
                    t.rows);
      }
      t.values.push_back(v);
    }
    ++t.rows;
  }
  if (t.rows == 0) throw Error(ErrorKind::data, "file has a header but no rows");
  return t;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<int> binarize_ratings(std::span<const double> values, double threshold) {
  std::vector<int> out(values.size());
  const bool binary = std::all_of(values.begin(), values.end(),
                                  [](double v) { return v == 0.0 || v == 1.0; });
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (binary) {
      out[i] = static_cast<int>(v);
      continue;
    }
    if (v < 1.0 || v > 10.0 || v != std::floor(v)) {
      throw Error(ErrorKind::data,
                  "rating at row " + std::to_string(i) + " is not an integer in [1, 10]", i);
    }
    out[i] = v >= threshold ? 1 : 0;
  }
  return out;
}

Dataset parse_dataset(std::istream& in, const LoadOptions& options) {
  CsvTable t = read_table(in);
  const auto schema = options.schema ? *options.schema : default_schema();
  for (const auto& name : schema) {
    if (std::find(t.header.begin(), t.header.end(), name) == t.header.end()) {
      throw Error(ErrorKind::schema, "missing column '" + name + "'");
    }
  }
  Dataset ds;
  ds.schema = std::move(t.header);
  ds.values = std::move(t.values);

  if (const auto c = ds.column(kPredefinedLabel)) {
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      const double v = ds.at(r, *c);
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorKind::data,
                    "row " + std::to_string(r) + ", column predefined_label: not 0 or 1", r);
      }
    }
  }
  if (const auto c = ds.column(kUserLabel)) {
    const auto labels = binarize_ratings(ds.column_values(*c), options.rating_threshold);
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      ds.values[r * ds.cols() + *c] = labels[r];
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  auto in = open_input(path);
  return parse_dataset(in, options);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (std::size_t c = 0; c < dataset.cols(); ++c) {
    out << (c ? "," : "") << dataset.schema[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.rows(); ++r) {
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
      out << (c ? "," : "") << format_double(dataset.at(r, c));
    }
    out << '\n';
  }
}

std::vector<dsp::RawSample> parse_raw_samples(std::istream& in) {
  const CsvTable t = read_table(in);
  const std::vector<std::string> expected{"timestamp", "channel", "value"};
  if (t.header != expected) {
    throw Error(ErrorKind::schema, "raw sample header must be timestamp,channel,value");
  }
  std::vector<dsp::RawSample> out(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) {
    const double ts = t.values[r * 3];
    const double ch = t.values[r * 3 + 1];
    const double v = t.values[r * 3 + 2];
    if (ts != std::floor(ts) || ch != std::floor(ch) || ch < 0) {
      throw Error(ErrorKind::data,
                  "row " + std::to_string(r) + ": timestamp and channel must be integers", r);
    }
    if (v < dsp::kMinAmplitude || v > dsp::kMaxAmplitude) {
      throw Error(ErrorKind::data,
                  "row " + std::to_string(r) + ": value outside the 16-bit range", r);
    }
    out[r] = {static_cast<std::int64_t>(ts), static_cast<int>(ch), v};
  }
  return out;
}

std::vector<dsp::RawSample> load_raw_samples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_raw_samples(in);
}

void write_raw_samples(std::ostream& out, std::span<const dsp::RawSample> samples) {
  out << "timestamp,channel,value\n";
  for (const auto& s : samples) {
    out << s.timestamp << ',' << s.channel << ',' << format_double(s.value) << '\n';
  }
}

}  // namespace attentiv
