#include "tcda/spline.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "tcda/error.hpp"

namespace tcda {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const auto n = static_cast<Eigen::Index>(x_.size());
  if (n < 4 || y_.size() != x_.size()) {
    throw Error(ErrorCode::invalid_argument,
                "cubic spline needs at least 4 nodes with matching values");
  }
  for (Eigen::Index k = 1; k < n; ++k) {
    if (!(x_[k] > x_[k - 1])) {
      throw Error(ErrorCode::invalid_argument, "spline nodes must be increasing");
    }
  }

  // Unknowns are the second derivatives M_k. Interior rows enforce C2
  // continuity; the two boundary rows enforce a continuous third derivative
  // across the first and last interior nodes (not-a-knot).
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  auto h = [&](Eigen::Index k) { return x_[k + 1] - x_[k]; };

  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    sys(k, k - 1) = h(k - 1) / 6.0;
    sys(k, k) = (h(k - 1) + h(k)) / 3.0;
    sys(k, k + 1) = h(k) / 6.0;
    rhs(k) = (y_[k + 1] - y_[k]) / h(k) - (y_[k] - y_[k - 1]) / h(k - 1);
  }
  sys(0, 0) = h(1);
  sys(0, 1) = -(h(0) + h(1));
  sys(0, 2) = h(0);
  sys(n - 1, n - 3) = h(n - 2);
  sys(n - 1, n - 2) = -(h(n - 3) + h(n - 2));
  sys(n - 1, n - 1) = h(n - 3);

  Eigen::VectorXd m = sys.partialPivLu().solve(rhs);
  m_.assign(m.data(), m.data() + n);
}

double CubicSpline::operator()(double x) const {
  const std::size_t n = x_.size();
  std::size_t k;
  if (x <= x_.front()) {
    k = 0;
  } else if (x >= x_.back()) {
    k = n - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  }
  const double h = x_[k + 1] - x_[k];
  const double a = (x_[k + 1] - x) / h;
  const double b = (x - x_[k]) / h;
  return a * y_[k] + b * y_[k + 1] +
         ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
}

}  // namespace tcda
