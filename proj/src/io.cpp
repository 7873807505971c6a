#include "tcda/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tcda/error.hpp"

namespace tcda {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

void write_tensor(const std::string& path, const TensorData& t, bool allow_nonfinite) {
  if (t.dims.empty()) throw Error(ErrorCode::format, "tensor needs rank >= 1");
  if (element_count(t.dims) != t.values.size()) {
    throw Error(ErrorCode::shape, "tensor payload does not match its dims");
  }
  if (!allow_nonfinite) {
    for (double v : t.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::numeric, "non-finite value in tensor " + path);
    }
  }
  std::string buf(kTensorMagic, 4);
  put_u32(buf, kTensorVersion);
  put_u32(buf, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(buf, d);
  for (double v : t.values) put_f64(buf, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::io, "short write to " + path);
}

TensorData read_tensor(const std::string& path, bool allow_nonfinite) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 12 || std::memcmp(p, kTensorMagic, 4) != 0) {
    throw Error(ErrorCode::format, "bad tensor magic in " + path);
  }
  if (get_le(p + 4, 4) != kTensorVersion) throw Error(ErrorCode::format, "unsupported tensor version in " + path);
  const auto rank = static_cast<std::size_t>(get_le(p + 8, 4));
  if (rank == 0) throw Error(ErrorCode::format, "tensor with empty dims in " + path);
  const std::size_t header = 12 + 4 * rank;
  if (buf.size() < header) throw Error(ErrorCode::format, "truncated tensor header in " + path);
  TensorData t;
  for (std::size_t r = 0; r < rank; ++r) {
    t.dims.push_back(static_cast<std::uint32_t>(get_le(p + 12 + 4 * r, 4)));
  }
  const std::size_t n = element_count(t.dims);
  if (buf.size() != header + 8 * n) throw Error(ErrorCode::format, "tensor payload size mismatch in " + path);
  t.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    t.values[k] = std::bit_cast<double>(get_le(p + header + 8 * k, 8));
    if (!allow_nonfinite && !std::isfinite(t.values[k])) {
      throw Error(ErrorCode::numeric, "non-finite value in tensor " + path);
    }
  }
  return t;
}

TensorData to_tensor(const Eigen::MatrixXd& m) {
  TensorData t;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.values.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  return t;
}

TensorData to_tensor(const Tensor3& x) {
  TensorData t;
  for (auto d : x.dims()) t.dims.push_back(static_cast<std::uint32_t>(d));
  t.values.assign(x.values().begin(), x.values().end());
  return t;
}

Eigen::MatrixXd to_matrix(const TensorData& t) {
  if (t.dims.size() != 2) throw Error(ErrorCode::shape, "expected a rank-2 tensor");
  Eigen::MatrixXd m(t.dims[0], t.dims[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[k++];
  }
  return m;
}

Tensor3 to_tensor3(const TensorData& t) {
  if (t.dims.size() != 3) throw Error(ErrorCode::shape, "expected a rank-3 tensor");
  Tensor3 x(t.dims[0], t.dims[1], t.dims[2]);
  std::copy(t.values.begin(), t.values.end(), x.values().begin());
  return x;
}

}  // namespace tcda
