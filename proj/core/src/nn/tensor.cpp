#include "stresscast/nn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace stresscast::nn {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) throw ValidationError("Tensor: value count does not match shape");
}

std::vector<double>& Tensor::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : grad_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor to_tensor(const Matrix& m) { return Tensor({m.rows(), m.cols()}, m.data()); }

}  // namespace stresscast::nn
