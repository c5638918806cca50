#pragma once

#include <span>

#include "stresscast/nn/tensor.hpp"

namespace stresscast::nn {

Tensor relu(const Tensor& x);
/// Upstream gradient masked by (pre_activation > 0).
Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_output);

/// Nearest-neighbour x2 along the time axis of a C x L tensor.
Tensor upsample2(const Tensor& x);
Tensor upsample2_backward(const Tensor& grad_output);

/// Keeps the first `length` samples of each channel.
Tensor crop(const Tensor& x, std::size_t length);
/// Zero-extends a cropped gradient back to `full_length`.
Tensor crop_backward(const Tensor& grad_output, std::size_t full_length);

/// C x L -> C, mean over time.
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_output, std::size_t length);

/// weight: 1 x C, bias: 1. Returns the scalar w.x + b.
double dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

double sigmoid(double z);

/// Probability clamped to [1e-7, 1 - 1e-7] inside the logarithms.
double bce_loss(double logit, double label);
/// Gradient of the unclamped loss with respect to the logit: sigmoid(z) - y.
double bce_grad(double logit, double label);

/// Mean squared error over all elements, and its gradient with respect to
/// the prediction.
double mse_loss(const Tensor& prediction, const Tensor& target);
Tensor mse_grad(const Tensor& prediction, const Tensor& target);

inline constexpr double kProbClamp = 1e-7;

}  // namespace stresscast::nn
