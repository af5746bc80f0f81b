#include "attentiv/signal_dsp.hpp"

#include "attentiv/error.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace attentiv::dsp {

namespace {

void validate_stream(std::span<const RawSample> stream) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const double v = stream[i].value;
    if (!std::isfinite(v) || v < kMinAmplitude || v > kMaxAmplitude) {
      throw Error(ErrorKind::parameter,
                  "sample " + std::to_string(i) +
                      " amplitude outside the 16-bit range",
                  i);
    }
    if (i > 0 && stream[i].timestamp <= stream[i - 1].timestamp) {
      throw Error(ErrorKind::stream_order,
                  "timestamp at sample " + std::to_string(i) +
                      " does not increase",
                  i);
    }
  }
}

std::vector<double> values_of(std::span<const RawSample> stream) {
  std::vector<double> out(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) out[i] = stream[i].value;
  return out;
}

}  // namespace

std::string_view band_name(BandId band) {
  switch (band) {
    case BandId::alpha: return "alpha";
    case BandId::beta: return "beta";
    case BandId::theta: return "theta";
    case BandId::delta: return "delta";
    case BandId::gamma: return "gamma";
  }
  return "";
}

double BandEnergies::operator[](BandId band) const {
  switch (band) {
    case BandId::alpha: return alpha;
    case BandId::beta: return beta;
    case BandId::theta: return theta;
    case BandId::delta: return delta;
    case BandId::gamma: return gamma;
  }
  return 0.0;
}

double& BandEnergies::operator[](BandId band) {
  switch (band) {
    case BandId::alpha: return alpha;
    case BandId::beta: return beta;
    case BandId::theta: return theta;
    case BandId::delta: return delta;
    case BandId::gamma: break;
  }
  return gamma;
}

std::vector<double> design_lowpass(double cutoff_hz, std::size_t taps,
                                   double fs_hz) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= fs_hz / 2.0) {
    throw Error(ErrorKind::parameter,
                "low-pass cutoff must lie in (0, fs/2)");
  }
  if (taps == 0 || taps % 2 == 0) {
    throw Error(ErrorKind::parameter, "FIR tap count must be odd");
  }
  const double fc = cutoff_hz / fs_hz;  // cycles per sample
  const double mid = static_cast<double>(taps - 1) / 2.0;
  std::vector<double> h(taps);
  // Compute one half and mirror it, so the taps are exactly symmetric.
  for (std::size_t k = 0; k <= taps / 2; ++k) {
    const double t = static_cast<double>(k) - mid;
    const double sinc =
        t == 0.0 ? 2.0 * fc
                 : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double window =
        taps == 1 ? 1.0
                  : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi *
                                           static_cast<double>(k) /
                                           static_cast<double>(taps - 1));
    h[k] = sinc * window;
    h[taps - 1 - k] = h[k];
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> apply_fir(std::span<const double> x,
                              std::span<const double> taps) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto len = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t delay = (len - 1) / 2;
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < len; ++k) {
      const std::ptrdiff_t j = i + delay - k;
      if (j >= 0 && j < n) acc += taps[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::vector<double> lowpass_filter(std::span<const RawSample> stream,
                                   double cutoff_hz) {
  const auto taps = design_lowpass(cutoff_hz);
  validate_stream(stream);
  const auto values = values_of(stream);
  return apply_fir(values, taps);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void check_window_params(std::size_t window, std::size_t hop) {
  if (!is_power_of_two(window)) {
    throw Error(ErrorKind::parameter, "window length must be a power of two");
  }
  if (hop < 1 || hop > window) {
    throw Error(ErrorKind::parameter, "hop must lie in [1, window]");
  }
}

}  // namespace

std::vector<SignalWindow> window_stream(std::span<const double> stream,
                                        std::size_t window, std::size_t hop,
                                        std::int64_t first_timestamp,
                                        int channel) {
  check_window_params(window, hop);
  std::vector<SignalWindow> out;
  for (std::size_t start = 0; start + window <= stream.size(); start += hop) {
    SignalWindow w;
    w.samples.assign(stream.begin() + static_cast<std::ptrdiff_t>(start),
                     stream.begin() + static_cast<std::ptrdiff_t>(start + window));
    w.start_timestamp = first_timestamp + static_cast<std::int64_t>(start);
    w.channel = channel;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<SignalWindow> window_samples(std::span<const RawSample> stream,
                                         std::size_t window, std::size_t hop) {
  check_window_params(window, hop);
  std::vector<SignalWindow> out;
  for (std::size_t start = 0; start + window <= stream.size(); start += hop) {
    SignalWindow w;
    w.samples.reserve(window);
    for (std::size_t i = start; i < start + window; ++i) {
      w.samples.push_back(stream[i].value);
    }
    w.start_timestamp = stream[start].timestamp;
    w.channel = stream[start].channel;
    out.push_back(std::move(w));
  }
  return out;
}

void fft(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw Error(ErrorKind::parameter, "FFT length must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const double angle =
          -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(angle), std::sin(angle));
      for (std::size_t start = 0; start < n; start += len) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> transform(std::span<const double> window) {
  if (window.size() != kWindowLength) {
    throw Error(ErrorKind::parameter,
                "PSD window must hold exactly " + std::to_string(kWindowLength) +
                    " samples");
  }
  std::vector<std::complex<double>> buf(kTransformLength);
  for (std::size_t i = 0; i < window.size(); ++i) buf[i] = window[i];
  fft(buf);
  return buf;
}

PowerSpectrum compute_psd(std::span<const double> window) {
  const auto spectrum = transform(window);
  PowerSpectrum psd;
  psd.bins.resize(kSpectrumBins);
  for (std::size_t n = 0; n < kSpectrumBins; ++n) {
    psd.bins[n] = std::norm(spectrum[n]) / static_cast<double>(kTransformLength);
  }
  return psd;
}

PowerSpectrum compute_psd(const SignalWindow& window) {
  return compute_psd(std::span<const double>(window.samples));
}

void validate_bands(const BandTable& bands, double fs_hz) {
  for (std::size_t b = 0; b < kBandCount; ++b) {
    const Band& band = bands.bands[b];
    if (!(band.low_hz > 0.0) || band.low_hz > band.high_hz ||
        band.high_hz > fs_hz / 2.0) {
      throw Error(ErrorKind::parameter,
                  std::string("band ") +
                      std::string(band_name(static_cast<BandId>(b))) +
                      " must satisfy 0 < low <= high <= fs/2");
    }
  }
}

BandEnergies band_energies(const PowerSpectrum& psd, const BandTable& bands) {
  validate_bands(bands);
  BandEnergies out;
  for (std::size_t b = 0; b < kBandCount; ++b) {
    const auto id = static_cast<BandId>(b);
    const Band& band = bands[id];
    double sum = 0.0;
    for (std::size_t n = 1; n < psd.bins.size(); ++n) {
      const double f = static_cast<double>(n) * psd.bin_hz;
      if (f >= band.low_hz && f <= band.high_hz) sum += psd.bins[n];
    }
    out[id] = sum;
  }
  return out;
}

BandEnergies window_energies(std::span<const double> window,
                             std::span<const double> taps,
                             const BandTable& bands) {
  const auto filtered = apply_fir(window, taps);
  return band_energies(compute_psd(filtered), bands);
}

std::vector<WindowFeatures> extract_features(std::span<const RawSample> raw,
                                             const ExtractionConfig& config) {
  const auto taps = design_lowpass(config.cutoff_hz);
  validate_bands(config.bands);
  validate_stream(raw);
  std::vector<WindowFeatures> out;
  for (const auto& w : window_samples(raw, config.window, config.hop)) {
    out.push_back({w.start_timestamp, w.channel,
                   window_energies(w.samples, taps, config.bands)});
  }
  return out;
}

}  // namespace attentiv::dsp
