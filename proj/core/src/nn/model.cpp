#include "stresscast/nn/model.hpp"

#include <cmath>
#include <sstream>

#include "stresscast/nn/ops.hpp"
#include "stresscast/rng.hpp"

namespace stresscast::nn {

std::string Architecture::describe() const {
  std::ostringstream s;
  s << "in" << in_channels << "|enc";
  for (std::size_t i = 0; i < 3; ++i) s << (i ? "," : "") << widths[i] << "k" << kernels[i] << "s" << stride;
  s << "|dec" << widths[1] << "k" << kernels[2] << "," << widths[0] << "k" << kernels[1] << "," << in_channels << "k"
    << kernels[0] << "|head" << head_width << "k" << head_kernel << ",gap,dense1,sigmoid";
  return s.str();
}

std::uint64_t Architecture::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : describe()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t Architecture::min_length() const {
  for (std::size_t len = 1;; ++len) {
    std::size_t l = len;
    bool ok = true;
    for (std::size_t i = 0; i < 3 && ok; ++i) {
      ok = l >= kernels[i];
      l = conv_output_length(l, stride);
    }
    ok = ok && l >= head_kernel && 2 * l >= kernels[2] && 4 * l >= kernels[1] && 8 * l >= kernels[0];
    if (ok) return std::max<std::size_t>(len, 32);
  }
}

ModelParams::ModelParams(const Architecture& arch) : arch_(arch) {
  const auto& w = arch.widths;
  const auto& k = arch.kernels;
  encoder = {Conv1d(arch.in_channels, w[0], k[0], arch.stride), Conv1d(w[0], w[1], k[1], arch.stride),
             Conv1d(w[1], w[2], k[2], arch.stride)};
  decoder = {Conv1d(w[2], w[1], k[2], 1), Conv1d(w[1], w[0], k[1], 1), Conv1d(w[0], arch.in_channels, k[0], 1)};
  head_conv = Conv1d(w[2], arch.head_width, arch.head_kernel, 1);
  head_weight = Tensor({1, arch.head_width});
  head_bias = Tensor({1});
}

ModelParams make_params_shell(const Architecture& arch) { return ModelParams(arch); }

ModelParams ModelParams::initialize(const Architecture& arch, std::uint64_t seed) {
  ModelParams p(arch);
  Rng rng(seed);
  auto fill = [&rng](Tensor& t, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
  };
  for (auto* layer : {&p.encoder[0], &p.encoder[1], &p.encoder[2], &p.decoder[0], &p.decoder[1], &p.decoder[2],
                      &p.head_conv}) {
    fill(layer->weight, layer->weight.dim(1) * layer->weight.dim(2));
  }
  fill(p.head_weight, arch.head_width);
  return p;
}

std::vector<Tensor*> ModelParams::encoder_tensors() {
  std::vector<Tensor*> out;
  for (auto& c : encoder) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  return out;
}

std::vector<Tensor*> ModelParams::decoder_tensors() {
  std::vector<Tensor*> out;
  for (auto& c : decoder) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  return out;
}

std::vector<Tensor*> ModelParams::head_tensors() {
  return {&head_conv.weight, &head_conv.bias, &head_weight, &head_bias};
}

std::vector<Tensor*> ModelParams::all_tensors() {
  auto out = encoder_tensors();
  for (auto* t : decoder_tensors()) out.push_back(t);
  for (auto* t : head_tensors()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> ModelParams::all_tensors() const {
  std::vector<const Tensor*> out;
  for (auto* t : const_cast<ModelParams*>(this)->all_tensors()) out.push_back(t);
  return out;
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < 3; ++i) {
    names.push_back("encoder." + std::to_string(i) + ".weight");
    names.push_back("encoder." + std::to_string(i) + ".bias");
  }
  for (int i = 0; i < 3; ++i) {
    names.push_back("decoder." + std::to_string(i) + ".weight");
    names.push_back("decoder." + std::to_string(i) + ".bias");
  }
  names.insert(names.end(), {"head.conv.weight", "head.conv.bias", "head.dense.weight", "head.dense.bias"});
  return names;
}

void ModelParams::zero_grad() {
  for (auto* t : all_tensors()) t->zero_grad();
}

bool ModelParams::same_values(const ModelParams& other) const {
  if (!(arch_ == other.arch_)) return false;
  const auto a = all_tensors();
  const auto b = other.all_tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(*a[i] == *b[i])) return false;
  }
  return true;
}

bool ModelParams::same_encoder(const ModelParams& other) const {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(encoder[i].weight == other.encoder[i].weight) || !(encoder[i].bias == other.encoder[i].bias)) return false;
  }
  return true;
}

void check_input(const ModelParams& params, const Tensor& x) {
  const auto& arch = params.architecture();
  if (x.shape().size() != 2 || x.dim(0) != arch.in_channels) {
    throw ValidationError("model input must be " + std::to_string(arch.in_channels) + " x L");
  }
  if (x.dim(1) < arch.min_length()) {
    throw ValidationError("window length " + std::to_string(x.dim(1)) + " below model minimum " +
                          std::to_string(arch.min_length()));
  }
}

namespace {

void accumulate(Tensor& param, const Tensor& delta) {
  auto& g = param.grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void conv_backward_into(Conv1d& layer, const Tensor& input, const Tensor& grad_out, Tensor* grad_in) {
  auto g = conv1d_backward(input, layer.weight, layer.stride, grad_out, grad_in != nullptr);
  accumulate(layer.weight, g.weight);
  accumulate(layer.bias, g.bias);
  if (grad_in) *grad_in = std::move(g.input);
}

/// Gradient flowing into the encoder output; propagates through all three
/// encoder layers.
void encoder_backward(ModelParams& params, const EncoderTrace& trace, Tensor grad) {
  for (int i = 2; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    Tensor g_pre = relu_backward(trace.pre[idx], grad);
    conv_backward_into(params.encoder[idx], trace.inputs[idx], g_pre, i > 0 ? &grad : nullptr);
  }
}

}  // namespace

Tensor encode(const ModelParams& params, const Tensor& x, EncoderTrace* trace) {
  Tensor h = x;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& layer = params.encoder[i];
    Tensor pre = conv1d_forward(h, layer.weight, layer.bias, layer.stride);
    Tensor act = relu(pre);
    if (trace) {
      trace->inputs[i] = std::move(h);
      trace->pre[i] = std::move(pre);
    }
    h = std::move(act);
  }
  return h;
}

double classifier_logit(const ModelParams& params, const Tensor& x, ClassifierTrace* trace) {
  check_input(params, x);
  Tensor z = encode(params, x, trace ? &trace->encoder : nullptr);
  Tensor pre = conv1d_forward(z, params.head_conv.weight, params.head_conv.bias, 1);
  Tensor pooled = global_avg_pool(relu(pre));
  const double logit = dense_forward(pooled, params.head_weight, params.head_bias);
  if (trace) {
    trace->head_input = std::move(z);
    trace->head_pre = std::move(pre);
    trace->pooled = std::move(pooled);
    trace->logit = logit;
  }
  return logit;
}

void classifier_backward(ModelParams& params, const ClassifierTrace& trace, double grad_logit, bool train_encoder) {
  auto& gw = params.head_weight.grad();
  const std::size_t width = trace.pooled.size();
  Tensor g_pooled({width});
  for (std::size_t c = 0; c < width; ++c) {
    gw[c] += grad_logit * trace.pooled[c];
    g_pooled[c] = grad_logit * params.head_weight[c];
  }
  params.head_bias.grad()[0] += grad_logit;

  Tensor g_act = global_avg_pool_backward(g_pooled, trace.head_pre.dim(1));
  Tensor g_pre = relu_backward(trace.head_pre, g_act);
  Tensor g_z;
  conv_backward_into(params.head_conv, trace.head_input, g_pre, train_encoder ? &g_z : nullptr);
  if (train_encoder) encoder_backward(params, trace.encoder, std::move(g_z));
}

Tensor reconstruct(const ModelParams& params, const Tensor& x, AutoencoderTrace* trace) {
  check_input(params, x);
  Tensor h = encode(params, x, trace ? &trace->encoder : nullptr);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& layer = params.decoder[i];
    Tensor up = upsample2(h);
    Tensor pre = conv1d_forward(up, layer.weight, layer.bias, 1);
    h = i < 2 ? relu(pre) : pre;
    if (trace) {
      trace->dec_inputs[i] = std::move(up);
      trace->dec_pre[i] = std::move(pre);
    }
  }
  if (trace) trace->target_length = x.dim(1);
  return crop(h, x.dim(1));
}

void autoencoder_backward(ModelParams& params, const AutoencoderTrace& trace, const Tensor& grad_output) {
  Tensor grad = crop_backward(grad_output, trace.dec_pre[2].dim(1));
  for (int i = 2; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    Tensor g_pre = idx < 2 ? relu_backward(trace.dec_pre[idx], grad) : std::move(grad);
    Tensor g_up;
    conv_backward_into(params.decoder[idx], trace.dec_inputs[idx], g_pre, &g_up);
    grad = upsample2_backward(g_up);
  }
  encoder_backward(params, trace.encoder, std::move(grad));
}

std::vector<double> classifier_forward(const ModelParams& params, std::span<const Tensor> batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(sigmoid(classifier_logit(params, x)));
  return out;
}

double classifier_batch_loss(ModelParams& params, std::span<const Tensor> batch, std::span<const double> labels,
                             bool accumulate_grads, bool train_encoder) {
  if (batch.size() != labels.size() || batch.empty()) throw ValidationError("classifier loss: bad batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  ClassifierTrace trace;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double logit = classifier_logit(params, batch[i], accumulate_grads ? &trace : nullptr);
    loss += bce_loss(logit, labels[i]);
    if (accumulate_grads) classifier_backward(params, trace, bce_grad(logit, labels[i]) * inv_n, train_encoder);
  }
  return loss * inv_n;
}

double classifier_batch_loss(const ModelParams& params, std::span<const Tensor> batch,
                             std::span<const double> labels) {
  if (batch.size() != labels.size() || batch.empty()) throw ValidationError("classifier loss: bad batch");
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) loss += bce_loss(classifier_logit(params, batch[i]), labels[i]);
  return loss / static_cast<double>(batch.size());
}

double autoencoder_batch_loss(ModelParams& params, std::span<const Tensor> batch, bool accumulate_grads) {
  if (batch.empty()) throw ValidationError("autoencoder loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  AutoencoderTrace trace;
  for (const auto& x : batch) {
    Tensor y = reconstruct(params, x, accumulate_grads ? &trace : nullptr);
    loss += mse_loss(y, x);
    if (accumulate_grads) {
      Tensor g = mse_grad(y, x);
      for (double& v : g.values()) v *= inv_n;
      autoencoder_backward(params, trace, g);
    }
  }
  return loss * inv_n;
}

}  // namespace stresscast::nn
