#pragma once

#include <complex>
#include <span>
#include <vector>

namespace stresscast::fft {

/// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-2 pi i k n / N}.
std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x);
std::vector<std::complex<double>> forward(std::span<const double> x);

/// Unnormalized inverse DFT: x[n] = sum_k X[k] e^{+2 pi i k n / N}.
std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> X);

}  // namespace stresscast::fft
