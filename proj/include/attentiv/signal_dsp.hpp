#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace attentiv::dsp {

inline constexpr double kSampleRateHz = 128.0;
inline constexpr std::size_t kWindowLength = 128;     // 1 s at 128 Hz
inline constexpr std::size_t kTransformLength = 256;  // zero-padded FFT size
inline constexpr std::size_t kSpectrumBins = kTransformLength / 2 + 1;
inline constexpr double kBinHz = kSampleRateHz / kTransformLength;  // 0.5 Hz
inline constexpr std::size_t kFilterTaps = 65;
inline constexpr double kDefaultCutoffHz = 50.0;
inline constexpr double kMinAmplitude = -32768.0;
inline constexpr double kMaxAmplitude = 32767.0;

// One electrode reading. timestamp is in 1/128 s ticks.
struct RawSample {
  std::int64_t timestamp = 0;
  int channel = 0;
  double value = 0.0;

  friend bool operator==(const RawSample&, const RawSample&) = default;
};

struct SignalWindow {
  std::vector<double> samples;
  std::int64_t start_timestamp = 0;
  int channel = 0;
};

// One-sided power spectrum, P(n) = |F(n)|^2 / N for n = 0..N/2.
struct PowerSpectrum {
  std::vector<double> bins;
  double bin_hz = kBinHz;
};

enum class BandId : std::size_t { alpha = 0, beta, theta, delta, gamma };
inline constexpr std::size_t kBandCount = 5;

std::string_view band_name(BandId band);

struct BandEnergies {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  double gamma = 0.0;

  double operator[](BandId band) const;
  double& operator[](BandId band);
  double total() const { return alpha + beta + theta + delta + gamma; }

  friend bool operator==(const BandEnergies&, const BandEnergies&) = default;
};

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// Inclusive frequency limits per band, indexed by BandId. The defaults leave
// gaps at 3-4, 7-8, 13-14 and 30-31 Hz.
struct BandTable {
  std::array<Band, kBandCount> bands{{
      {8.0, 13.0},   // alpha
      {14.0, 30.0},  // beta
      {4.0, 7.0},    // theta
      {0.5, 3.0},    // delta
      {31.0, 50.0},  // gamma
  }};

  const Band& operator[](BandId band) const {
    return bands[static_cast<std::size_t>(band)];
  }
  Band& operator[](BandId band) { return bands[static_cast<std::size_t>(band)]; }
};

// Linear-phase Hamming-windowed-sinc low-pass taps, normalized to unity DC
// gain. taps must be odd.
std::vector<double> design_lowpass(double cutoff_hz,
                                   std::size_t taps = kFilterTaps,
                                   double fs_hz = kSampleRateHz);

// Centered FIR convolution with zeros assumed outside [0, x.size()).
// Output has the length of x; the (taps-1)/2 group delay is compensated.
std::vector<double> apply_fir(std::span<const double> x,
                              std::span<const double> taps);

// Low-pass filter one sample stream. Timestamps must be strictly increasing
// and values within the 16-bit amplitude range.
std::vector<double> lowpass_filter(std::span<const RawSample> stream,
                                   double cutoff_hz = kDefaultCutoffHz);

bool is_power_of_two(std::size_t n);

// Consecutive slices [k*hop, k*hop + W); a trailing partial window is dropped.
// Window k gets start timestamp first_timestamp + k*hop.
std::vector<SignalWindow> window_stream(std::span<const double> stream,
                                        std::size_t window, std::size_t hop,
                                        std::int64_t first_timestamp = 0,
                                        int channel = 0);

// Same slicing over raw samples; start timestamps come from the samples.
std::vector<SignalWindow> window_samples(std::span<const RawSample> stream,
                                         std::size_t window, std::size_t hop);

// In-place iterative radix-2 FFT. data.size() must be a power of two.
void fft(std::span<std::complex<double>> data);

// Full two-sided N=256 transform of a 128-sample window zero-padded to 256.
std::vector<std::complex<double>> transform(std::span<const double> window);

PowerSpectrum compute_psd(std::span<const double> window);
PowerSpectrum compute_psd(const SignalWindow& window);

// Sum of PSD bins n >= 1 whose center frequency n * bin_hz lies in
// [low_hz, high_hz] of each band. The DC bin never contributes.
BandEnergies band_energies(const PowerSpectrum& psd,
                           const BandTable& bands = BandTable{});

void validate_bands(const BandTable& bands, double fs_hz = kSampleRateHz);

struct ExtractionConfig {
  std::size_t window = kWindowLength;
  std::size_t hop = kWindowLength;
  double cutoff_hz = kDefaultCutoffHz;
  BandTable bands;
};

struct WindowFeatures {
  std::int64_t start_timestamp = 0;
  int channel = 0;
  BandEnergies energies;
};

// Filter, transform and band-sum one window of raw amplitudes. The low-pass
// runs over the window alone (zero-padded at both ends), so the result
// depends only on these samples. Streaming and batch paths share this.
BandEnergies window_energies(std::span<const double> window,
                             std::span<const double> taps,
                             const BandTable& bands);

// Full batch path for one channel: window -> filter -> PSD -> band energies.
// Fewer than config.window samples yield an empty result.
std::vector<WindowFeatures> extract_features(std::span<const RawSample> raw,
                                             const ExtractionConfig& config = {});

}  // namespace attentiv::dsp
