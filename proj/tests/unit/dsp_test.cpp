#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stresscast/dsp.hpp"

using namespace stresscast;
using namespace stresscast::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(double freq, double rate, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate + phase);
  return v;
}

double max_abs_tail(const std::vector<double>& v, double fraction) {
  double m = 0.0;
  for (std::size_t i = static_cast<std::size_t>(static_cast<double>(v.size()) * (1.0 - fraction)); i < v.size(); ++i) {
    m = std::max(m, std::abs(v[i]));
  }
  return m;
}

}  // namespace

TEST(Lowpass, CutoffDcAndStopband) {
  const auto spec = design_butterworth_lowpass(6, 1.0, 4.0);
  EXPECT_EQ(spec.sections.size(), 3u);
  EXPECT_TRUE(spec.is_stable());
  EXPECT_NEAR(magnitude_response(spec, 1.0), std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(magnitude_response(spec, 0.0), 1.0, 1e-12);
  EXPECT_LT(magnitude_response(spec, 1.9), 1e-3);
}

TEST(Lowpass, MagnitudeIsMonotoneDecreasing) {
  const auto spec = design_butterworth_lowpass(6, 1.0, 4.0);
  double prev = magnitude_response(spec, 0.0);
  for (double f = 0.01; f <= 2.0; f += 0.01) {
    const double m = magnitude_response(spec, f);
    EXPECT_LE(m, prev + 1e-12) << f;
    prev = m;
  }
}

TEST(Lowpass, OddOrderAddsFirstOrderSection) {
  const auto spec = design_butterworth_lowpass(3, 5.0, 64.0);
  EXPECT_EQ(spec.sections.size(), 2u);
  EXPECT_NEAR(magnitude_response(spec, 5.0), std::sqrt(0.5), 1e-9);
  EXPECT_TRUE(spec.is_stable());
}

TEST(Lowpass, AnalogPrototypeMatchesPrewarpedButterworth) {
  // |H| of a bilinear-mapped Butterworth equals the analog response at the
  // warped frequency: 1 / sqrt(1 + (tan(pi f/fs) / tan(pi fc/fs))^(2n)).
  for (int order : {1, 2, 4, 6, 7}) {
    const double fs = 64.0, fc = 6.0;
    const auto spec = design_butterworth_lowpass(order, fc, fs);
    for (double f : {0.5, 3.0, 6.0, 10.0, 20.0, 31.0}) {
      const double ratio = std::tan(kPi * f / fs) / std::tan(kPi * fc / fs);
      const double expected = 1.0 / std::sqrt(1.0 + std::pow(ratio, 2 * order));
      EXPECT_NEAR(magnitude_response(spec, f), expected, 1e-9) << order << " " << f;
    }
  }
}

TEST(Bandpass, EdgesCenterAndDc) {
  const auto spec = design_butterworth_bandpass(2, 2.0, 12.0, 64.0);
  EXPECT_EQ(spec.sections.size(), 2u);
  EXPECT_TRUE(spec.is_stable());
  EXPECT_NEAR(magnitude_response(spec, 2.0), std::sqrt(0.5), 1e-3);
  EXPECT_NEAR(magnitude_response(spec, 12.0), std::sqrt(0.5), 1e-3);
  EXPECT_LT(magnitude_response(spec, 0.0), 1e-9);
  const double mid = magnitude_response(spec, 5.0);
  EXPECT_GE(mid, 0.99);
  EXPECT_LE(mid, 1.0 + 1e-12);
}

TEST(Design, RejectsBadArguments) {
  EXPECT_THROW(design_butterworth_lowpass(0, 1.0, 4.0), ValidationError);
  EXPECT_THROW(design_butterworth_lowpass(6, 2.0, 4.0), ValidationError);
  EXPECT_THROW(design_butterworth_bandpass(2, 12.0, 2.0, 64.0), ValidationError);
  const auto spec = design_butterworth_lowpass(6, 1.0, 4.0);
  EXPECT_THROW(magnitude_response(spec, 2.5), ValidationError);
}

TEST(ApplyFilter, ImpulseResponseSpectrumMatchesDesign) {
  for (const auto& spec : {design_butterworth_lowpass(6, 1.0, 4.0), design_butterworth_bandpass(2, 2.0, 12.0, 64.0)}) {
    const std::size_t n = 4096;
    std::vector<double> impulse(n, 0.0);
    impulse[0] = 1.0;
    const auto h = apply_filter(spec, impulse);
    for (std::size_t k = 0; k <= n / 2; k += 37) {
      const double f = static_cast<double>(k) * spec.sample_rate / static_cast<double>(n);
      EXPECT_NEAR(oracle::dft_magnitude(h, k), magnitude_response(spec, f), 1e-3) << f;
    }
  }
}

TEST(ApplyFilter, ConstantInputConverges) {
  const std::vector<double> c(240, 3.5);
  const auto lp = apply_filter(design_butterworth_lowpass(6, 1.0, 4.0), c);
  for (std::size_t i = 180; i < lp.size(); ++i) EXPECT_NEAR(lp[i], 3.5, 1e-6);
  const std::vector<double> b(64 * 60, 3.5);
  EXPECT_LT(max_abs_tail(apply_filter(design_butterworth_bandpass(2, 2.0, 12.0, 64.0), b), 0.25), 1e-6);
}

TEST(ApplyFilter, SteadyStateStartHasNoTransient) {
  const std::vector<double> c(40, -2.0);
  const auto lp = apply_filter(design_butterworth_lowpass(6, 1.0, 4.0), c, FilterInit::SteadyState);
  for (double v : lp) EXPECT_NEAR(v, -2.0, 1e-9);
  const auto bp = apply_filter(design_butterworth_bandpass(2, 2.0, 12.0, 64.0), c, FilterInit::SteadyState);
  for (double v : bp) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(ApplyFilter, StopbandSineIsAttenuatedAsDesigned) {
  const auto spec = design_butterworth_lowpass(6, 1.0, 4.0);
  const auto y = apply_filter(spec, sine(1.9, 4.0, 4 * 600));
  const double tail = max_abs_tail(y, 0.25);
  EXPECT_LT(tail, 1e-2);
  EXPECT_LE(tail, magnitude_response(spec, 1.9) * (1.0 + 1e-6));
  EXPECT_GE(tail, 0.9 * magnitude_response(spec, 1.9));
}

TEST(ApplyFilter, IsLinear) {
  oracle::Gen g(11);
  const auto spec = design_butterworth_bandpass(2, 2.0, 12.0, 64.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = g.vec(200), b = g.vec(200);
    const double alpha = g.uniform(-2, 2);
    std::vector<double> mix(200);
    for (std::size_t i = 0; i < 200; ++i) mix[i] = a[i] + alpha * b[i];
    const auto ya = apply_filter(spec, a), yb = apply_filter(spec, b), ym = apply_filter(spec, mix);
    for (std::size_t i = 0; i < 200; ++i) EXPECT_NEAR(ym[i], ya[i] + alpha * yb[i], 1e-10);
  }
}

TEST(ApplyFilter, RejectsNonFiniteAndEmpty) {
  const auto spec = design_butterworth_lowpass(6, 1.0, 4.0);
  EXPECT_THROW(apply_filter(spec, std::vector<double>{}), ValidationError);
  EXPECT_THROW(apply_filter(spec, std::vector<double>{1.0, NAN}), ValidationError);
}

TEST(ResampleFourier, ConstantUpsample) {
  const auto y = resample_fourier(std::vector<double>{1, 1, 1, 1}, 4.0, 64.0);
  ASSERT_EQ(y.size(), 64u);
  for (double v : y) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(ResampleFourier, PeriodicSineMatchesAnalytic) {
  const auto x = sine(0.5, 4.0, 32);
  const auto y = resample_fourier(x, 4.0, 64.0);
  const auto expected = sine(0.5, 64.0, 512);
  ASSERT_EQ(y.size(), expected.size());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-6);
}

TEST(ResampleFourier, BandlimitedRoundTrip) {
  oracle::Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    // Integer number of cycles over 16 s keeps every component periodic.
    std::vector<double> x(64 * 16, 0.0);
    for (int c = 0; c < 5; ++c) {
      const double f = g.integer(1, 31) / 16.0;  // < 2 Hz
      const auto s = sine(f, 64.0, x.size(), g.uniform(0.1, 1.0), g.uniform(0.0, 6.0));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
    }
    const auto down = resample_fourier(x, 64.0, 4.0);
    ASSERT_EQ(down.size(), 64u);
    const auto up = resample_fourier(down, 4.0, 64.0);
    ASSERT_EQ(up.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(up[i], x[i], 1e-6);
  }
}

TEST(ResampleLinear, ClampsPastLastSample) {
  const auto y = resample_linear(std::vector<double>{0.0, 2.0}, 1.0, 2.0);
  EXPECT_EQ(y, (std::vector<double>{0.0, 1.0, 2.0, 2.0}));
}

TEST(ResampleLinear, IdentityAndRampExactness) {
  const std::vector<double> x{3.0, -1.0, 4.0, 1.5};
  EXPECT_EQ(resample_linear(x, 4.0, 4.0), x);
  std::vector<double> ramp(60);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 + 2.0 * static_cast<double>(i);
  const auto y = resample_linear(ramp, 1.0, 4.0);
  ASSERT_EQ(y.size(), 240u);
  for (std::size_t j = 0; j + 4 < y.size(); ++j) EXPECT_NEAR(y[j], 0.5 + 2.0 * static_cast<double>(j) / 4.0, 1e-12);
}

TEST(Resample, LengthsRound) {
  EXPECT_EQ(resampled_length(240, 4.0, 64.0), 3840u);
  EXPECT_EQ(resampled_length(3840, 64.0, 4.0), 240u);
  EXPECT_EQ(resampled_length(60, 1.0, 4.0), 240u);
}
