#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "stresscast/common.hpp"

namespace stresscast::nn {

/// Dense row-major tensor with an optional same-shape gradient buffer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Allocated on first use; zero-filled.
  std::vector<double>& grad();
  const std::vector<double>& grad() const { return grad_; }
  bool has_grad() const { return !grad_.empty(); }
  void zero_grad();

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_ && a.values_ == b.values_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

/// Copies a channels x samples matrix into a 2-D tensor.
Tensor to_tensor(const Matrix& m);

}  // namespace stresscast::nn
