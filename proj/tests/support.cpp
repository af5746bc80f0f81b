#include "support.hpp"

#include "attentiv/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

namespace testsupport {

namespace dsp = attentiv::dsp;

std::vector<std::complex<long double>> naive_dft(std::span<const double> x, std::size_t n) {
  std::vector<std::complex<long double>> out(n);
  const long double pi = std::numbers::pi_v<long double>;
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t t = 0; t < x.size(); ++t) {
      // reduce k*t mod n first so the angle stays accurate
      const long double angle = -2.0L * pi * static_cast<long double>((k * t) % n) /
                                static_cast<long double>(n);
      re += x[t] * std::cos(angle);
      im += x[t] * std::sin(angle);
    }
    out[k] = {re, im};
  }
  return out;
}

std::vector<double> naive_psd(std::span<const double> x, std::size_t n) {
  const auto f = naive_dft(x, n);
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = static_cast<double>(std::norm(f[k]) / static_cast<long double>(n));
  }
  return p;
}

double fir_gain(std::span<const double> taps, double freq_hz, double fs_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / fs_hz;
  const double center = (static_cast<double>(taps.size()) - 1.0) / 2.0;
  std::complex<double> h = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    h += taps[k] * std::polar(1.0, -w * (static_cast<double>(k) - center));
  }
  return std::abs(h);
}

std::vector<double> random_window(std::mt19937_64& rng, std::size_t n, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

std::vector<double> sine(std::size_t n, double freq_hz, double amplitude, double phase,
                         double fs_hz) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude *
           std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs_hz + phase);
  }
  return x;
}

std::vector<dsp::RawSample> raw_stream(std::size_t n, std::uint64_t seed,
                                       std::int64_t first_timestamp, int channel) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 40.0);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::vector<dsp::RawSample> out(n);
  double wa = weight(rng);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 96 == 0) wa = weight(rng);  // drift off the window grid
    const double t = static_cast<double>(i) / 128.0;
    phase = 2.0 * std::numbers::pi * t;
    const double v = 400.0 * wa * std::sin(10.0 * phase) +
                     400.0 * (1.0 - wa) * std::sin(21.0 * phase + 0.3) +
                     60.0 * std::sin(5.0 * phase) + noise(rng);
    out[i] = {first_timestamp + static_cast<std::int64_t>(i), channel,
              std::clamp(std::round(v), -32768.0, 32767.0)};
  }
  return out;
}

double mann_whitney(std::span<const int> truth, std::span<const double> scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

FeatureMatrix make_matrix(std::size_t d, const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
  FeatureMatrix m(rows.size(), names);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) m.at(i, j) = rows[i][j];
  }
  if (!labels.empty()) m.labels = labels;
  return m;
}

FeatureMatrix blobs(std::size_t per_class, std::size_t d, double margin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int c = 0; c < 2; ++c) {
    const double sign = c == 1 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> x(d);
      x[0] = sign * (margin + std::abs(g(rng)));
      for (std::size_t j = 1; j < d; ++j) x[j] = g(rng);
      rows.push_back(std::move(x));
      labels.push_back(c);
    }
  }
  return make_matrix(d, rows, labels);
}

FeatureMatrix noise_matrix(std::size_t n, std::size_t d, double positive_rate,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution pos(positive_rate);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = g(rng);
    labels[i] = pos(rng) ? 1 : 0;
  }
  return make_matrix(d, rows, labels);
}

attentiv::Dataset synthetic_paper_dataset(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  attentiv::Dataset ds;
  ds.schema = attentiv::default_schema();
  ds.schema.pop_back();  // no user_label: 13 features + predefined_label
  const auto col = [&](const char* name) { return *ds.column(name); };
  ds.values.assign(rows * ds.cols(), 0.0);
  const std::vector<const char*> correlated{"meditation", "raw",   "delta",  "theta",
                                            "beta1",      "beta2", "gamma1", "gamma2"};
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = static_cast<int>(r % 2);
    const double shift = label == 1 ? 0.5 : -0.5;
    double* row = ds.values.data() + r * ds.cols();
    row[col("subject_id")] = static_cast<double>(r % 9);
    row[col("video_id")] = static_cast<double>((r / 9) % 10);
    row[col("attention")] = 50.0 + 15.0 * g(rng);
    const double latent = shift + g(rng);  // weak: 1 sigma between classes
    for (const char* name : correlated) {
      row[col(name)] = 100.0 * (latent + 0.05 * g(rng));
    }
    row[col("alpha1")] = 1000.0 * (5.0 * shift + g(rng));  // strong: 5 sigma
    row[col("alpha2")] = 1000.0 * (0.3 * shift + g(rng));
    row[col("predefined_label")] = label;
  }
  return ds;
}

FeatureMatrix band_training_matrix(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 40.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto names = attentiv::band_feature_names();
  FeatureMatrix m(2 * per_class, names);
  std::vector<int> labels;
  const auto taps = dsp::design_lowpass(dsp::kDefaultCutoffHz);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = static_cast<int>(i % 2);
    // class 0 leans alpha (10 Hz), class 1 leans beta (21 Hz)
    const double wa = label == 0 ? 0.5 + 0.5 * u(rng) : 0.5 * u(rng);
    const double phase = 6.283 * u(rng);
    std::vector<double> x(dsp::kWindowLength);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / 128.0;
      x[k] = 400.0 * wa * std::sin(10.0 * t + phase) +
             400.0 * (1.0 - wa) * std::sin(21.0 * t + 0.3 + phase) +
             60.0 * std::sin(5.0 * t) + noise(rng);
    }
    const auto e = dsp::window_energies(x, taps, dsp::BandTable{});
    for (std::size_t b = 0; b < dsp::kBandCount; ++b) {
      m.at(i, b) = e[static_cast<dsp::BandId>(b)];
    }
    labels.push_back(label);
  }
  m.labels = labels;
  return m;
}

attentiv::TrainedModel band_model(attentiv::Algorithm algorithm, std::uint64_t seed) {
  attentiv::AlgorithmConfig config;
  config.algorithm = algorithm;
  config.forest.trees = 25;
  config.ensemble.forest.trees = 15;
  return attentiv::fit_model(band_training_matrix(60, seed), config, seed);
}

double accuracy(const std::vector<attentiv::Prediction>& p, const std::vector<int>& truth) {
  if (p.size() != truth.size() || p.empty()) throw std::invalid_argument("accuracy sizes");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hit += p[i].label == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(p.size());
}

TempDir::TempDir() {
  namespace fs = std::filesystem;
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate =
        fs::temp_directory_path() / ("attentiv-test-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      root_ = candidate.string();
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(root_, ec);
}

std::string TempDir::path(const std::string& name) const {
  return (std::filesystem::path(root_) / name).string();
}

}  // namespace testsupport
