#include "stresscast/dsp.hpp"

#include <cmath>
#include <numbers>

#include "stresscast/common.hpp"
#include "stresscast/fft.hpp"

namespace stresscast::dsp {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Poles of the normalized analog Butterworth prototype, upper half plane
/// first for each conjugate pair; a real pole (odd order) comes last.
std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = kPi * (2.0 * k + order + 1) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  if (order % 2 == 1) poles.emplace_back(-1.0, 0.0);
  return poles;
}

cplx bilinear(cplx s, double fs) {
  const double k = 2.0 * fs;
  return (k + s) / (k - s);
}

/// Biquad with the given digital zero pair and pole pair, unity gain.
Biquad section_from_roots(cplx zero_a, cplx zero_b, cplx pole) {
  Biquad q;
  const cplx zsum = zero_a + zero_b;
  const cplx zprod = zero_a * zero_b;
  q.b0 = 1.0;
  q.b1 = -zsum.real();
  q.b2 = zprod.real();
  q.a1 = -2.0 * pole.real();
  q.a2 = std::norm(pole);
  return q;
}

void normalize_section(Biquad& q, double omega) {
  const double g = std::abs(q.response(omega));
  q.b0 /= g;
  q.b1 /= g;
  q.b2 /= g;
}

void check_rate(double sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ValidationError("sample rate must be positive");
}

}  // namespace

std::pair<std::complex<double>, std::complex<double>> Biquad::poles() const {
  const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
  return {(-a1 + disc) / 2.0, (-a1 - disc) / 2.0};
}

std::complex<double> Biquad::response(double omega) const {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

bool FilterSpec::is_stable() const {
  for (const auto& q : sections) {
    const auto [p1, p2] = q.poles();
    if (!(std::abs(p1) < 1.0) || !(std::abs(p2) < 1.0)) return false;
  }
  return true;
}

FilterSpec design_butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  check_rate(sample_rate_hz);
  if (order < 1) throw ValidationError("filter order must be >= 1");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
    throw ValidationError("lowpass cutoff must lie in (0, Nyquist)");
  }
  FilterSpec spec{FilterKind::Lowpass, order, 0.0, cutoff_hz, sample_rate_hz, {}};
  const double warped = 2.0 * sample_rate_hz * std::tan(kPi * cutoff_hz / sample_rate_hz);
  for (const cplx& p : prototype_poles(order)) {
    const cplx zp = bilinear(p * warped, sample_rate_hz);
    Biquad q;
    if (p.imag() == 0.0) {
      // First order: zero at z = -1, pole real.
      q.b0 = 1.0;
      q.b1 = 1.0;
      q.a1 = -zp.real();
    } else {
      q = section_from_roots(-1.0, -1.0, zp);
    }
    normalize_section(q, 0.0);
    spec.sections.push_back(q);
  }
  return spec;
}

FilterSpec design_butterworth_bandpass(int order_per_edge, double low_hz, double high_hz, double sample_rate_hz) {
  check_rate(sample_rate_hz);
  if (order_per_edge < 1) throw ValidationError("filter order must be >= 1");
  if (!(low_hz > 0.0) || !(low_hz < high_hz)) throw ValidationError("bandpass edges must satisfy 0 < low < high");
  if (!(high_hz < sample_rate_hz / 2.0)) throw ValidationError("bandpass high edge must lie below Nyquist");

  FilterSpec spec{FilterKind::Bandpass, order_per_edge, low_hz, high_hz, sample_rate_hz, {}};
  const double fs = sample_rate_hz;
  const double w_lo = 2.0 * fs * std::tan(kPi * low_hz / fs);
  const double w_hi = 2.0 * fs * std::tan(kPi * high_hz / fs);
  const double bw = w_hi - w_lo;
  const double w0_sq = w_lo * w_hi;
  // Centre frequency of the analog band maps back to this digital frequency,
  // where the Butterworth band-pass gain is exactly 1.
  const double omega_center = 2.0 * std::atan(std::sqrt(w0_sq) / (2.0 * fs));

  // Each prototype pole p yields the two roots of s^2 - p bw s + w0^2.
  std::vector<cplx> upper_poles;
  for (const cplx& p : prototype_poles(order_per_edge)) {
    const cplx disc = std::sqrt(p * p * bw * bw - 4.0 * w0_sq);
    const cplx s1 = (p * bw + disc) / 2.0;
    const cplx s2 = (p * bw - disc) / 2.0;
    if (p.imag() == 0.0) {
      // Real prototype pole: s1, s2 are either a conjugate pair or both real.
      if (std::abs(s1.imag()) > 0.0) {
        upper_poles.push_back(s1.imag() > 0 ? s1 : s2);
      } else {
        upper_poles.push_back(s1);
        upper_poles.push_back(s2);
      }
    } else {
      // Conjugate prototype pair: s1, s2 and their conjugates.
      upper_poles.push_back(s1);
      upper_poles.push_back(s2);
    }
  }
  for (const cplx& s : upper_poles) {
    const cplx zp = bilinear(s, fs);
    Biquad q;
    if (s.imag() == 0.0) {
      q.b0 = 1.0;
      q.b1 = -1.0;  // zero at z = 1 (s = 0)
      q.a1 = -zp.real();
    } else {
      q = section_from_roots(1.0, -1.0, zp);
    }
    normalize_section(q, omega_center);
    spec.sections.push_back(q);
  }
  return spec;
}

double magnitude_response(const FilterSpec& spec, double freq_hz) {
  if (!(freq_hz >= 0.0) || !(freq_hz <= spec.sample_rate / 2.0)) {
    throw ValidationError("frequency must lie in [0, Nyquist]");
  }
  const double omega = 2.0 * kPi * freq_hz / spec.sample_rate;
  double gain = 1.0;
  for (const auto& q : spec.sections) gain *= std::abs(q.response(omega));
  return gain;
}

std::vector<double> apply_filter(const FilterSpec& spec, std::span<const double> samples, FilterInit init) {
  if (samples.empty()) throw ValidationError("apply_filter: empty input");
  for (double v : samples) {
    if (!std::isfinite(v)) throw ValidationError("apply_filter: non-finite input");
  }
  std::vector<double> out(samples.begin(), samples.end());
  for (const auto& q : spec.sections) {
    double s1 = 0.0;
    double s2 = 0.0;
    if (init == FilterInit::SteadyState) {
      const double u = out.front();
      const double y = u * (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
      s2 = q.b2 * u - q.a2 * y;
      s1 = q.b1 * u - q.a1 * y + s2;
    }
    for (double& v : out) {
      const double x = v;
      const double y = q.b0 * x + s1;
      s1 = q.b1 * x - q.a1 * y + s2;
      s2 = q.b2 * x - q.a2 * y;
      v = y;
    }
  }
  return out;
}

std::size_t resampled_length(std::size_t n_in, double rate_in_hz, double rate_out_hz) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * rate_out_hz / rate_in_hz));
}

std::vector<double> resample_fourier(std::span<const double> samples, double rate_in_hz, double rate_out_hz) {
  if (samples.empty()) throw ValidationError("resample_fourier: empty input");
  if (!(rate_in_hz > 0.0) || !(rate_out_hz > 0.0)) throw ValidationError("resample_fourier: rates must be positive");
  const std::size_t n_in = samples.size();
  const std::size_t n_out = resampled_length(n_in, rate_in_hz, rate_out_hz);
  if (n_out < 1) throw ValidationError("resample_fourier: output length would be zero");
  if (n_out == n_in) return {samples.begin(), samples.end()};

  const auto X = fft::forward(samples);
  std::vector<cplx> Y(n_out, cplx(0.0, 0.0));
  const std::size_t n = std::min(n_in, n_out);
  // Bins strictly below the shared Nyquist frequency, both signs.
  const std::size_t half = (n - 1) / 2;
  for (std::size_t k = 0; k <= half; ++k) Y[k] = X[k];
  for (std::size_t k = 1; k <= half; ++k) Y[n_out - k] = X[n_in - k];
  if (n % 2 == 0) {
    const std::size_t h = n / 2;
    if (n_out > n_in) {
      Y[h] = X[h] * 0.5;
      Y[n_out - h] = X[h] * 0.5;
    } else {
      Y[h] = X[h] + X[n_in - h];
    }
  }
  const auto y = fft::inverse(Y);
  std::vector<double> out(n_out);
  const double scale = 1.0 / static_cast<double>(n_in);
  for (std::size_t i = 0; i < n_out; ++i) out[i] = y[i].real() * scale;
  return out;
}

std::vector<double> resample_linear(std::span<const double> samples, double rate_in_hz, double rate_out_hz) {
  if (samples.size() < 2) throw ValidationError("resample_linear: need at least 2 samples");
  if (!(rate_in_hz > 0.0) || !(rate_out_hz > 0.0)) throw ValidationError("resample_linear: rates must be positive");
  const std::size_t n_in = samples.size();
  const std::size_t n_out = resampled_length(n_in, rate_in_hz, rate_out_hz);
  std::vector<double> out(n_out);
  if (rate_in_hz == rate_out_hz) {
    std::copy(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(std::min(n_in, n_out)), out.begin());
    return out;
  }
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * rate_in_hz / rate_out_hz;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= n_in) {
      out[j] = samples[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out[j] = samples[i] + frac * (samples[i + 1] - samples[i]);
  }
  return out;
}

}  // namespace stresscast::dsp
