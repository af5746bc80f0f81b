#pragma once

// Oracles and fixture generators shared by the unit and acceptance suites.
// Oracles here are written independently of the library code they check.

#include "attentiv/classifier.hpp"
#include "attentiv/error.hpp"
#include "attentiv/features.hpp"
#include "attentiv/signal_dsp.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace testsupport {

using attentiv::FeatureMatrix;

// Direct O(N^2) DFT of x zero-padded to n points, in long double.
std::vector<std::complex<long double>> naive_dft(std::span<const double> x, std::size_t n);

// |F(k)|^2 / n for k = 0..n/2 from the direct DFT.
std::vector<double> naive_psd(std::span<const double> x, std::size_t n = 256);

// H(f) = sum_k taps[k] e^{-i 2 pi f (k - center) / fs}, magnitude.
double fir_gain(std::span<const double> taps, double freq_hz, double fs_hz = 128.0);

std::vector<double> random_window(std::mt19937_64& rng, std::size_t n = 128,
                                  double amplitude = 1000.0);

std::vector<double> sine(std::size_t n, double freq_hz, double amplitude = 1.0,
                         double phase = 0.0, double fs_hz = 128.0);

// In-range raw stream: sinusoid mixture plus noise, rounded to integers.
std::vector<attentiv::dsp::RawSample> raw_stream(std::size_t n, std::uint64_t seed,
                                                 std::int64_t first_timestamp = 0,
                                                 int channel = 0);

// P(score_pos > score_neg) + 0.5 P(tie), by enumerating every pair.
double mann_whitney(std::span<const int> truth, std::span<const double> scores);

FeatureMatrix make_matrix(std::size_t d, const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels);

// Two Gaussian blobs in d dimensions whose projections on the first axis are
// separated by a gap of at least 2 * margin around 0.
FeatureMatrix blobs(std::size_t per_class, std::size_t d, double margin, std::uint64_t seed);

// Labels independent of the features.
FeatureMatrix noise_matrix(std::size_t n, std::size_t d, double positive_rate,
                           std::uint64_t seed);

// 1200 rows with the 13 paper feature columns plus predefined_label. Class 1
// shifts alpha1 strongly; a weak shared latent shift is spread over eight
// near-duplicate columns, which a naive independence model overcounts.
attentiv::Dataset synthetic_paper_dataset(std::size_t rows = 1200, std::uint64_t seed = 2024);

// Labeled band-energy matrix from synthetic windows: class 0 alpha-dominant,
// class 1 beta-dominant. Columns are the five band names.
FeatureMatrix band_training_matrix(std::size_t per_class, std::uint64_t seed);

attentiv::TrainedModel band_model(attentiv::Algorithm algorithm, std::uint64_t seed);

double accuracy(const std::vector<attentiv::Prediction>& p, const std::vector<int>& truth);

// Fresh temporary directory removed on destruction.
// Kind of the attentiv::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<attentiv::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const attentiv::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string path(const std::string& name) const;

 private:
  std::string root_;
};

}  // namespace testsupport
