#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stresscast/nn/conv1d.hpp"
#include "stresscast/nn/tensor.hpp"

namespace stresscast::nn {

/// Shape of the convolutional autoencoder and classifier head.
/// Encoder: in -> widths[0] -> widths[1] -> widths[2], each conv strided,
/// ReLU after each. Decoder mirrors it with x2 nearest upsampling + stride-1
/// conv, ReLU on all but the last layer. Head: conv(widths[2] -> head_width)
/// + ReLU, global average pool, dense head_width -> 1, sigmoid.
struct Architecture {
  std::size_t in_channels = 4;
  std::array<std::size_t, 3> widths{16, 32, 64};
  std::array<std::size_t, 3> kernels{7, 5, 3};
  std::size_t stride = 2;
  std::size_t head_width = 32;
  std::size_t head_kernel = 3;

  std::string describe() const;
  std::uint64_t hash() const;
  /// Shortest input length every layer accepts.
  std::size_t min_length() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

class ModelParams {
 public:
  /// He-uniform weights (bound sqrt(6 / fan_in)) drawn in a fixed order from
  /// the seed; zero biases.
  static ModelParams initialize(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }

  std::array<Conv1d, 3> encoder;
  std::array<Conv1d, 3> decoder;
  Conv1d head_conv;
  Tensor head_weight;  // 1 x head_width
  Tensor head_bias;    // 1
  /// Window length the parameters were trained at; 0 when never trained.
  std::size_t input_length = 0;

  std::vector<Tensor*> encoder_tensors();
  std::vector<Tensor*> decoder_tensors();
  std::vector<Tensor*> head_tensors();
  std::vector<Tensor*> all_tensors();
  std::vector<const Tensor*> all_tensors() const;
  /// Parameter names in all_tensors() order.
  std::vector<std::string> tensor_names() const;

  void zero_grad();

  /// Bitwise equality of every parameter value.
  bool same_values(const ModelParams& other) const;
  bool same_encoder(const ModelParams& other) const;

 private:
  explicit ModelParams(const Architecture& arch);
  friend ModelParams make_params_shell(const Architecture& arch);

  Architecture arch_;
};

/// Allocates zero-valued parameters (used by deserialization).
ModelParams make_params_shell(const Architecture& arch);

struct EncoderTrace {
  std::array<Tensor, 3> inputs;  // input to each conv
  std::array<Tensor, 3> pre;     // conv outputs before ReLU
};

struct ClassifierTrace {
  EncoderTrace encoder;
  Tensor head_input;
  Tensor head_pre;
  Tensor pooled;
  double logit = 0.0;
};

struct AutoencoderTrace {
  EncoderTrace encoder;
  std::array<Tensor, 3> dec_inputs;  // upsampled inputs to each decoder conv
  std::array<Tensor, 3> dec_pre;
  std::size_t target_length = 0;
};

/// Encoder output (after the last ReLU).
Tensor encode(const ModelParams& params, const Tensor& x, EncoderTrace* trace = nullptr);

double classifier_logit(const ModelParams& params, const Tensor& x, ClassifierTrace* trace = nullptr);
/// Accumulates parameter gradients for dL/dlogit = grad_logit. Encoder
/// gradients are skipped when train_encoder is false.
void classifier_backward(ModelParams& params, const ClassifierTrace& trace, double grad_logit, bool train_encoder);

/// Decoder output cropped to the input length.
Tensor reconstruct(const ModelParams& params, const Tensor& x, AutoencoderTrace* trace = nullptr);
void autoencoder_backward(ModelParams& params, const AutoencoderTrace& trace, const Tensor& grad_output);

/// Throws ValidationError unless x is in_channels x L with L >= min_length().
void check_input(const ModelParams& params, const Tensor& x);

/// Sigmoid probabilities, one per batch element.
std::vector<double> classifier_forward(const ModelParams& params, std::span<const Tensor> batch);

/// Mean binary cross-entropy over the batch. With accumulate, adds the
/// gradient of that mean to the parameter gradients.
double classifier_batch_loss(ModelParams& params, std::span<const Tensor> batch, std::span<const double> labels,
                             bool accumulate, bool train_encoder = true);
double classifier_batch_loss(const ModelParams& params, std::span<const Tensor> batch,
                             std::span<const double> labels);

/// Mean (over the batch) of the per-window reconstruction MSE.
double autoencoder_batch_loss(ModelParams& params, std::span<const Tensor> batch, bool accumulate);

}  // namespace stresscast::nn
