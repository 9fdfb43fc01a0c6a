#pragma once

// Spectral analysis of uniformly sampled correlation signals: removal of the
// slow envelope, Hann window, FFT magnitude and peak refinement.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "jcmp/error.hpp"

namespace jcmp {

struct Spectrum {
  std::vector<double> omega;      // angular frequency of each bin
  std::vector<double> magnitude;  // |FFT| of the windowed, detrended signal
};

/// Centered moving average with `window` samples (shrinks at the ends).
inline std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
  if (window == 0) throw DomainError("moving_average: window must be positive");
  const std::size_t half = window / 2;
  std::vector<double> prefix(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(v.size(), i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

/// One-sided spectrum of `signal` sampled every dt after subtracting its
/// moving average over `envelope_time`.
inline Spectrum beat_spectrum(const std::vector<double>& signal, double dt, double envelope_time) {
  if (signal.size() < 8) throw DomainError("beat_spectrum: need at least 8 samples");
  if (!(dt > 0.0)) throw DomainError("beat_spectrum: dt must be > 0");
  const auto window = static_cast<std::size_t>(std::max(1.0, std::round(envelope_time / dt)));
  const auto trend = moving_average(signal, window);
  const std::size_t n = signal.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    x[i] = (signal[i] - trend[i]) * hann;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, x);
  Spectrum s;
  const std::size_t half = n / 2 + 1;
  s.omega.resize(half);
  s.magnitude.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    s.omega[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * dt);
    s.magnitude[k] = std::abs(freq[k]);
  }
  return s;
}

struct SpectralPeak {
  double omega;
  double magnitude;
};

/// Largest bin with omega in [lo, hi], refined by a parabola through the
/// bin and its neighbours.
inline std::optional<SpectralPeak> find_peak(const Spectrum& s, double lo, double hi) {
  std::optional<std::size_t> best;
  for (std::size_t k = 1; k + 1 < s.omega.size(); ++k) {
    if (s.omega[k] < lo || s.omega[k] > hi) continue;
    if (!best || s.magnitude[k] > s.magnitude[*best]) best = k;
  }
  if (!best) return std::nullopt;
  const std::size_t k = *best;
  const double a = s.magnitude[k - 1], b = s.magnitude[k], c = s.magnitude[k + 1];
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
  const double dw = s.omega[1] - s.omega[0];
  return SpectralPeak{s.omega[k] + shift * dw, b - 0.25 * (a - c) * shift};
}

}  // namespace jcmp
