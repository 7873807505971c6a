#pragma once

#include <array>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "tcda/rng.hpp"
#include "tcda/spline.hpp"

namespace tcda {

enum class Saturation { none, input, output };

struct Identity {};

// f1: sgn(x)|x|^beta, f2: c|(x+1)/c|^beta - 1, f3: -c|(x-1)/c|^beta + 1.
struct Monotonic {
  int variant = 1;  // 1, 2 or 3
  double beta = 1.0;
  double c = 2.0;
};

// Sorted knot values at equidistant abscissae on [-1, 1].
struct TrendSpline {
  CubicSpline curve;
};

// One Gaussian-process draw realized at equidistant anchors on [-1, 1];
// inputs outside the anchor range are clamped to it.
struct GpDraw {
  CubicSpline curve;
};

enum class BaseFunction {
  cbrt, tanh, asinh, relu, identity, square, abs, cosh, sin, cos,
};
inline constexpr int kNumBaseFunctions = 10;

// sum_j sign_j * b_{j,2}(b_{j,1}(x)) over two chains.
struct Composite {
  std::array<std::array<BaseFunction, 2>, 2> chains{};
  std::array<int, 2> signs{1, 1};
};

using FunctionFamily = std::variant<Identity, Monotonic, TrendSpline, GpDraw, Composite>;

// A univariate edge mechanism stored as data so SCMs replay bit-identically.
struct FunctionDescriptor {
  FunctionFamily family = Identity{};
  Saturation wrapper = Saturation::none;
  double alpha = 1.0;

  double operator()(double x) const;
  bool is_identity() const { return std::holds_alternative<Identity>(family); }
  std::string family_name() const;
};

double apply_base(BaseFunction b, double x);

// Returns f wrapped so that inputs (mode input) or outputs (mode output)
// outside [-alpha, alpha] are replaced by tanh of the input / output.
std::function<double(double)> wrap_saturate(std::function<double(double)> f,
                                            Saturation mode, double alpha = 1.0);

struct BetaIntervals {
  double lower_lo, lower_hi, upper_lo, upper_hi;
};
BetaIntervals monotonic_beta_intervals(int level);

FunctionDescriptor sample_monotonic(int level, Rng& rng);
FunctionDescriptor make_monotonic(int variant, double beta);

inline constexpr std::array<int, 5> kSplinePointsTable{12, 10, 8, 6, 4};
inline constexpr std::array<int, 5> kSplinePointsAppendix{25, 15, 10, 6, 4};

FunctionDescriptor sample_spline_trend(int num_points, Rng& rng);
FunctionDescriptor make_spline_trend(std::vector<double> knot_values);

inline constexpr int kGpAnchors = 50;
double rbf_kernel(double a, double b, double length_scale = 1.0);
FunctionDescriptor sample_gp_rbf(Rng& rng);
FunctionDescriptor make_gp_draw(std::vector<double> anchor_values);

FunctionDescriptor sample_composite(Rng& rng);
FunctionDescriptor make_composite(const std::array<std::array<BaseFunction, 2>, 2>& chains,
                                  std::array<int, 2> signs);

// Least-squares line on [-1, 1]: slope (3/2) int x f, intercept (1/2) int f.
struct Line {
  double slope;
  double intercept;
};
inline constexpr int kSimpsonNodes = 2001;
Line optimal_line(const std::function<double(double)>& f, int nodes = kSimpsonNodes);

// Minimum mean squared deviation of f from any line on [-1, 1].
double nonlinearity_mse(const std::function<double(double)>& f, int nodes = kSimpsonNodes);

}  // namespace tcda
