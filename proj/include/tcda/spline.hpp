#pragma once

#include <span>
#include <vector>

namespace tcda {

// Cubic interpolating spline through (x_k, y_k) with not-a-knot end
// conditions. With four nodes this is the unique interpolating cubic; in
// general it coincides with the degree-3 B-spline interpolant whose interior
// knots are the data sites minus the second and second-to-last ones.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  // Evaluates the piecewise cubic; outside the node range the end pieces are
  // extrapolated.
  double operator()(double x) const;

  std::span<const double> nodes() const { return x_; }
  std::span<const double> values() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
};

}  // namespace tcda
