#pragma once

#include <cstddef>
#include <vector>

#include "stresscast/nn/tensor.hpp"

namespace stresscast::nn {

/// Adaptive moment estimation over a fixed list of parameter tensors.
/// Moment buffers start at zero; each step reads the tensors' gradients.
class Adam {
 public:
  explicit Adam(std::vector<Tensor*> params, double learning_rate = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step();
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

}  // namespace stresscast::nn
