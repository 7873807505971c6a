#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tcda {

// Dense rank-3 tensor stored row-major. Used for lagged coefficient and
// score tensors with layout (target, source, lag index).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t n0, std::size_t n1, std::size_t n2, double fill = 0.0)
      : dims_{n0, n1, n2}, data_(n0 * n1 * n2, fill) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }

  std::size_t dim(std::size_t axis) const { return dims_[axis]; }
  const std::array<std::size_t, 3>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::array<std::size_t, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

}  // namespace tcda
