#pragma once

#include <cstddef>
#include <optional>

#include "stresscast/nn/tensor.hpp"

namespace stresscast::nn {

/// ceil(length / stride).
std::size_t conv_output_length(std::size_t length, std::size_t stride);
/// Left zero-padding for "same" convolution before striding.
std::size_t conv_pad_left(std::size_t length, std::size_t kernel, std::size_t stride);

/// input: C_in x L, weight: C_out x C_in x K, bias: C_out.
/// out[o][t] = bias[o] + sum_{i,k} weight[o][i][k] * in[i][t*stride + k - pad]
Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride);

struct Conv1dGrads {
  Tensor input;   // empty when not requested
  Tensor weight;
  Tensor bias;
};

/// Exact gradients of conv1d_forward given the upstream gradient.
Conv1dGrads conv1d_backward(const Tensor& input, const Tensor& weight, std::size_t stride,
                            const Tensor& grad_output, bool need_input_grad = true);

/// Convolution layer that caches its last input for backward().
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride);

  Tensor forward(const Tensor& input);
  /// Accumulates into weight/bias gradients and returns the input gradient.
  /// Throws std::logic_error without a cached forward input.
  Tensor backward(const Tensor& grad_output, bool need_input_grad = true);
  void clear_cache() { cached_input_.reset(); }

  Tensor weight;  // C_out x C_in x K
  Tensor bias;    // C_out
  std::size_t stride = 1;

 private:
  std::optional<Tensor> cached_input_;
};

}  // namespace stresscast::nn
