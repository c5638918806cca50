#include "stresscast/nn/conv1d.hpp"

#include <algorithm>
#include <stdexcept>

namespace stresscast::nn {

std::size_t conv_output_length(std::size_t length, std::size_t stride) { return (length + stride - 1) / stride; }

std::size_t conv_pad_left(std::size_t length, std::size_t kernel, std::size_t stride) {
  const std::size_t out = conv_output_length(length, stride);
  const std::size_t needed = (out - 1) * stride + kernel;
  const std::size_t total = needed > length ? needed - length : 0;
  return total / 2;
}

namespace {

struct Dims {
  std::size_t cin, cout, k, len, out, stride, pad;
};

Dims check(const Tensor& input, const Tensor& weight, std::size_t stride) {
  if (input.shape().size() != 2 || weight.shape().size() != 3) throw ValidationError("conv1d: bad tensor rank");
  if (weight.dim(1) != input.dim(0)) throw ValidationError("conv1d: channel mismatch");
  if (stride == 0) throw ValidationError("conv1d: stride must be >= 1");
  const std::size_t len = input.dim(1);
  const std::size_t k = weight.dim(2);
  if (len < k) throw ValidationError("conv1d: input shorter than kernel");
  return {input.dim(0), weight.dim(0), k, len, conv_output_length(len, stride), stride,
          conv_pad_left(len, k, stride)};
}

/// Output positions t whose tap k reads an in-range sample:
/// 0 <= t*stride + k - pad < len.
std::pair<std::size_t, std::size_t> valid_range(const Dims& d, std::size_t k) {
  std::size_t lo = 0;
  if (k < d.pad) lo = (d.pad - k + d.stride - 1) / d.stride;
  // t*stride + k - pad <= len - 1  =>  t <= (len - 1 + pad - k) / stride
  const std::size_t limit = d.len - 1 + d.pad;
  if (limit < k) return {0, 0};
  const std::size_t hi = std::min(d.out, (limit - k) / d.stride + 1);
  return {lo, std::max(lo, hi)};
}

}  // namespace

Tensor conv1d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride) {
  const Dims d = check(input, weight, stride);
  if (bias.size() != d.cout) throw ValidationError("conv1d: bias size mismatch");
  Tensor out({d.cout, d.out});
  const double* in = input.values().data();
  const double* w = weight.values().data();
  double* y = out.values().data();
  for (std::size_t o = 0; o < d.cout; ++o) {
    double* yo = y + o * d.out;
    std::fill(yo, yo + d.out, bias[o]);
    for (std::size_t i = 0; i < d.cin; ++i) {
      const double* xi = in + i * d.len;
      for (std::size_t k = 0; k < d.k; ++k) {
        const double wk = w[(o * d.cin + i) * d.k + k];
        const auto [lo, hi] = valid_range(d, k);
        const double* src = xi + (lo * d.stride + k - d.pad);
        for (std::size_t t = lo; t < hi; ++t, src += d.stride) yo[t] += wk * *src;
      }
    }
  }
  return out;
}

Conv1dGrads conv1d_backward(const Tensor& input, const Tensor& weight, std::size_t stride, const Tensor& grad_output,
                            bool need_input_grad) {
  const Dims d = check(input, weight, stride);
  if (grad_output.shape() != std::vector<std::size_t>{d.cout, d.out}) {
    throw ValidationError("conv1d_backward: upstream gradient shape mismatch");
  }
  Conv1dGrads g{need_input_grad ? Tensor({d.cin, d.len}) : Tensor(), Tensor(weight.shape()), Tensor({d.cout})};
  const double* in = input.values().data();
  const double* w = weight.values().data();
  const double* gy = grad_output.values().data();
  double* gw = g.weight.values().data();
  double* gx = need_input_grad ? g.input.values().data() : nullptr;
  for (std::size_t o = 0; o < d.cout; ++o) {
    const double* gyo = gy + o * d.out;
    double sum = 0.0;
    for (std::size_t t = 0; t < d.out; ++t) sum += gyo[t];
    g.bias[o] = sum;
    for (std::size_t i = 0; i < d.cin; ++i) {
      const double* xi = in + i * d.len;
      double* gxi = gx ? gx + i * d.len : nullptr;
      for (std::size_t k = 0; k < d.k; ++k) {
        const std::size_t widx = (o * d.cin + i) * d.k + k;
        const auto [lo, hi] = valid_range(d, k);
        const std::size_t base = lo * d.stride + k - d.pad;
        double acc = 0.0;
        for (std::size_t t = lo, p = base; t < hi; ++t, p += d.stride) acc += gyo[t] * xi[p];
        gw[widx] = acc;
        if (gxi) {
          const double wk = w[widx];
          for (std::size_t t = lo, p = base; t < hi; ++t, p += d.stride) gxi[p] += wk * gyo[t];
        }
      }
    }
  }
  return g;
}

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride_)
    : weight({out_channels, in_channels, kernel}), bias({out_channels}), stride(stride_) {}

Tensor Conv1d::forward(const Tensor& input) {
  auto out = conv1d_forward(input, weight, bias, stride);
  cached_input_ = input;
  return out;
}

Tensor Conv1d::backward(const Tensor& grad_output, bool need_input_grad) {
  if (!cached_input_) throw std::logic_error("Conv1d::backward called without a cached forward input");
  auto g = conv1d_backward(*cached_input_, weight, stride, grad_output, need_input_grad);
  auto& gw = weight.grad();
  for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += g.weight[i];
  auto& gb = bias.grad();
  for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g.bias[i];
  return std::move(g.input);
}

}  // namespace stresscast::nn
