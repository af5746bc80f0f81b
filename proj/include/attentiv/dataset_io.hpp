#pragma once

#include "attentiv/features.hpp"
#include "attentiv/signal_dsp.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attentiv {

// subject_id, video_id, attention, meditation, raw, delta, theta, alpha1,
// alpha2, beta1, beta2, gamma1, gamma2, predefined_label, user_label
std::vector<std::string> default_schema();

// Reduced single-column-per-band layout: alpha1/alpha2 etc. collapsed into
// alpha, beta, gamma.
std::vector<std::string> band_schema();

// The five band-energy feature names produced by extraction, in BandId order.
std::vector<std::string> band_feature_names();

inline constexpr double kDefaultRatingThreshold = 6.0;

struct LoadOptions {
  // Columns that must be present: default_schema() when unset, nothing
  // beyond a header when empty.
  std::optional<std::vector<std::string>> schema;
  double rating_threshold = kDefaultRatingThreshold;
};

// Self/observer confusion ratings (1..10) to labels: >= threshold -> 1.
// A column already holding only 0/1 passes through unchanged. Throws data
// error on a value that is neither binary nor an integer rating.
std::vector<int> binarize_ratings(std::span<const double> values,
                                  double threshold = kDefaultRatingThreshold);

// Comma-separated, mandatory header, one numeric record per line. Every
// schema column must be present (extra columns are kept). The user_label
// column, when present, is binarized; predefined_label must be 0/1.
Dataset parse_dataset(std::istream& in, const LoadOptions& options = {});
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

void write_dataset(std::ostream& out, const Dataset& dataset);

// Raw sample CSV with header timestamp,channel,value.
std::vector<dsp::RawSample> parse_raw_samples(std::istream& in);
std::vector<dsp::RawSample> load_raw_samples(const std::filesystem::path& path);
void write_raw_samples(std::ostream& out, std::span<const dsp::RawSample> samples);

// Shortest text that parses back to exactly v.
std::string format_double(double v);

}  // namespace attentiv
