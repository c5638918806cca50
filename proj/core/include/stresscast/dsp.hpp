#pragma once

#include <complex>
#include <span>
#include <vector>

namespace stresscast::dsp {

/// One second-order section, a0 normalized to 1:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
/// First-order sections use b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Roots of z^2 + a1 z + a2 (one root is 0 for first-order sections).
  std::pair<std::complex<double>, std::complex<double>> poles() const;
  std::complex<double> response(double omega) const;
};

enum class FilterKind { Lowpass, Bandpass };

struct FilterSpec {
  FilterKind kind = FilterKind::Lowpass;
  int order = 0;            // prototype order (per edge for bandpass)
  double cutoff_low = 0.0;  // Hz, bandpass only
  double cutoff_high = 0.0; // Hz
  double sample_rate = 0.0; // Hz
  std::vector<Biquad> sections;

  bool is_stable() const;
};

/// Butterworth low-pass via bilinear transform with prewarping at the cutoff.
/// Even orders give order/2 biquads; odd orders add one first-order section.
FilterSpec design_butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz);

/// Butterworth band-pass from an order_per_edge analog low-pass prototype
/// (2 * order_per_edge poles). Both edges are prewarped, so the gain is
/// exactly 1/sqrt(2) at low_hz and high_hz.
FilterSpec design_butterworth_bandpass(int order_per_edge, double low_hz, double high_hz, double sample_rate_hz);

/// |H(e^{i 2 pi f / fs})| of the full cascade. f must lie in [0, fs/2].
double magnitude_response(const FilterSpec& spec, double freq_hz);

enum class FilterInit {
  Zero,         // all section states zero
  SteadyState,  // states as if x[0] had been applied forever
};

/// Causal single pass through the cascade (transposed direct form II).
std::vector<double> apply_filter(const FilterSpec& spec, std::span<const double> samples,
                                 FilterInit init = FilterInit::Zero);

/// Spectral resampling: DFT, truncate or zero-pad the spectrum (halving the
/// Nyquist bin when upsampling an even-length input, folding it when
/// downsampling to an even length), inverse DFT, scale by n_out / n_in.
std::vector<double> resample_fourier(std::span<const double> samples, double rate_in_hz, double rate_out_hz);

/// Linear interpolation on the input grid; query times past the last input
/// sample hold the last value.
std::vector<double> resample_linear(std::span<const double> samples, double rate_in_hz, double rate_out_hz);

/// round(n_in * rate_out / rate_in).
std::size_t resampled_length(std::size_t n_in, double rate_in_hz, double rate_out_hz);

}  // namespace stresscast::dsp
