#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tcda/tensor.hpp"

namespace tcda {

inline constexpr char kTensorMagic[4] = {'T', 'C', 'D', 'A'};
inline constexpr std::uint32_t kTensorVersion = 1;

// Contents of a tensor container: rank = dims.size(), row-major values.
struct TensorData {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

void write_tensor(const std::string& path, const TensorData& t, bool allow_nonfinite = false);
TensorData read_tensor(const std::string& path, bool allow_nonfinite = false);

TensorData to_tensor(const Eigen::MatrixXd& m);
TensorData to_tensor(const Tensor3& t);
Eigen::MatrixXd to_matrix(const TensorData& t);
Tensor3 to_tensor3(const TensorData& t);

}  // namespace tcda
