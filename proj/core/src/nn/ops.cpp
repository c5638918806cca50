#include "stresscast/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace stresscast::nn {

namespace {

void require_2d(const Tensor& x, const char* what) {
  if (x.shape().size() != 2) throw ValidationError(std::string(what) + ": expected a C x L tensor");
}

}  // namespace

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_output) {
  if (pre_activation.shape() != grad_output.shape()) throw ValidationError("relu_backward: shape mismatch");
  Tensor g(grad_output.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = pre_activation[i] > 0.0 ? grad_output[i] : 0.0;
  return g;
}

Tensor upsample2(const Tensor& x) {
  require_2d(x, "upsample2");
  const std::size_t c = x.dim(0), len = x.dim(1);
  Tensor y({c, 2 * len});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t t = 0; t < len; ++t) {
      const double v = x[ch * len + t];
      y[ch * 2 * len + 2 * t] = v;
      y[ch * 2 * len + 2 * t + 1] = v;
    }
  }
  return y;
}

Tensor upsample2_backward(const Tensor& grad_output) {
  require_2d(grad_output, "upsample2_backward");
  const std::size_t c = grad_output.dim(0), len = grad_output.dim(1) / 2;
  Tensor g({c, len});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t t = 0; t < len; ++t) {
      g[ch * len + t] = grad_output[ch * 2 * len + 2 * t] + grad_output[ch * 2 * len + 2 * t + 1];
    }
  }
  return g;
}

Tensor crop(const Tensor& x, std::size_t length) {
  require_2d(x, "crop");
  const std::size_t c = x.dim(0), len = x.dim(1);
  if (length > len) throw ValidationError("crop: target longer than input");
  Tensor y({c, length});
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(ch * len), length,
                y.values().begin() + static_cast<std::ptrdiff_t>(ch * length));
  }
  return y;
}

Tensor crop_backward(const Tensor& grad_output, std::size_t full_length) {
  require_2d(grad_output, "crop_backward");
  const std::size_t c = grad_output.dim(0), len = grad_output.dim(1);
  Tensor g({c, full_length});
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::copy_n(grad_output.values().begin() + static_cast<std::ptrdiff_t>(ch * len), len,
                g.values().begin() + static_cast<std::ptrdiff_t>(ch * full_length));
  }
  return g;
}

Tensor global_avg_pool(const Tensor& x) {
  require_2d(x, "global_avg_pool");
  const std::size_t c = x.dim(0), len = x.dim(1);
  Tensor y({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) s += x[ch * len + t];
    y[ch] = s / static_cast<double>(len);
  }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& grad_output, std::size_t length) {
  const std::size_t c = grad_output.size();
  Tensor g({c, length});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double v = grad_output[ch] / static_cast<double>(length);
    std::fill_n(g.values().begin() + static_cast<std::ptrdiff_t>(ch * length), length, v);
  }
  return g;
}

double dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.size() != x.size() || bias.size() != 1) throw ValidationError("dense: shape mismatch");
  double z = bias[0];
  for (std::size_t i = 0; i < x.size(); ++i) z += weight[i] * x[i];
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_loss(double logit, double label) {
  const double p = std::clamp(sigmoid(logit), kProbClamp, 1.0 - kProbClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

double bce_grad(double logit, double label) { return sigmoid(logit) - label; }

double mse_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) throw ValidationError("mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = prediction[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(prediction.size());
}

Tensor mse_grad(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) throw ValidationError("mse: shape mismatch");
  Tensor g(prediction.shape());
  const double scale = 2.0 / static_cast<double>(prediction.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (prediction[i] - target[i]);
  return g;
}

}  // namespace stresscast::nn
