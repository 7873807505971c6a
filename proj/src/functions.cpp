#include "tcda/functions.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tcda/error.hpp"

namespace tcda {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double eval_monotonic(const Monotonic& m, double x) {
  switch (m.variant) {
    case 1:
      return (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) * std::pow(std::abs(x), m.beta);
    case 2:
      return m.c * std::pow(std::abs((x + 1.0) / m.c), m.beta) - 1.0;
    default:
      return -m.c * std::pow(std::abs((x - 1.0) / m.c), m.beta) + 1.0;
  }
}

double eval_family(const FunctionFamily& family, double x) {
  return std::visit(
      Overloaded{
          [&](const Identity&) { return x; },
          [&](const Monotonic& m) { return eval_monotonic(m, x); },
          [&](const TrendSpline& s) { return s.curve(x); },
          [&](const GpDraw& g) { return g.curve(std::clamp(x, -1.0, 1.0)); },
          [&](const Composite& c) {
            double sum = 0.0;
            for (int j = 0; j < 2; ++j) {
              const double inner = apply_base(c.chains[j][0], x);
              sum += c.signs[j] * apply_base(c.chains[j][1], inner);
            }
            return sum;
          },
      },
      family);
}

std::vector<double> equidistant(int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = -1.0 + 2.0 * k / (n - 1);
  return x;
}

void check_level(int level) {
  if (level < 1 || level > 5) {
    throw Error(ErrorCode::invalid_argument, "violation level must be in 1..5");
  }
}

// Composite Simpson over [-1, 1]; `nodes` is forced odd.
template <class F>
double simpson(F&& g, int nodes) {
  if (nodes % 2 == 0) ++nodes;
  const double h = 2.0 / (nodes - 1);
  double acc = g(-1.0) + g(1.0);
  for (int k = 1; k < nodes - 1; ++k) {
    acc += (k % 2 == 1 ? 4.0 : 2.0) * g(-1.0 + k * h);
  }
  return acc * h / 3.0;
}

}  // namespace

double apply_base(BaseFunction b, double x) {
  switch (b) {
    case BaseFunction::cbrt: return std::cbrt(x);
    case BaseFunction::tanh: return std::tanh(x);
    case BaseFunction::asinh: return std::asinh(x);
    case BaseFunction::relu: return std::max(x, 0.0);
    case BaseFunction::identity: return x;
    case BaseFunction::square: return x * x;
    case BaseFunction::abs: return std::abs(x);
    case BaseFunction::cosh: return std::cosh(x);
    case BaseFunction::sin: return std::sin(x);
    case BaseFunction::cos: return std::cos(x);
  }
  return x;
}

double FunctionDescriptor::operator()(double x) const {
  switch (wrapper) {
    case Saturation::input:
      if (x < -alpha || x > alpha) return std::tanh(x);
      return eval_family(family, x);
    case Saturation::output: {
      const double y = eval_family(family, x);
      return std::abs(y) <= alpha ? y : std::tanh(y);
    }
    case Saturation::none:
      break;
  }
  return eval_family(family, x);
}

std::string FunctionDescriptor::family_name() const {
  return std::visit(Overloaded{
                        [](const Identity&) { return std::string("identity"); },
                        [](const Monotonic&) { return std::string("monotonic"); },
                        [](const TrendSpline&) { return std::string("spline"); },
                        [](const GpDraw&) { return std::string("gp_rbf"); },
                        [](const Composite&) { return std::string("composite"); },
                    },
                    family);
}

std::function<double(double)> wrap_saturate(std::function<double(double)> f,
                                            Saturation mode, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "saturation alpha must be > 0");
  switch (mode) {
    case Saturation::input:
      return [f = std::move(f), alpha](double x) {
        return (x < -alpha || x > alpha) ? std::tanh(x) : f(x);
      };
    case Saturation::output:
      return [f = std::move(f), alpha](double x) {
        const double y = f(x);
        return std::abs(y) <= alpha ? y : std::tanh(y);
      };
    case Saturation::none:
      break;
  }
  return f;
}

BetaIntervals monotonic_beta_intervals(int level) {
  check_level(level);
  static constexpr std::array<BetaIntervals, 5> table{{
      {1.0 / 2, 1.0, 1.0, 2.0},
      {1.0 / 4, 1.0 / 2, 2.0, 4.0},
      {1.0 / 8, 1.0 / 4, 4.0, 8.0},
      {1.0 / 12, 1.0 / 8, 8.0, 12.0},
      {1.0 / 20, 1.0 / 12, 12.0, 20.0},
  }};
  return table[level - 1];
}

FunctionDescriptor make_monotonic(int variant, double beta) {
  if (variant < 1 || variant > 3 || !(beta > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "monotonic variant in 1..3 and beta > 0 required");
  }
  // Saturating the input keeps the mechanism monotone and bounded off [-1, 1].
  return FunctionDescriptor{Monotonic{variant, beta, 2.0}, Saturation::input, 1.0};
}

FunctionDescriptor sample_monotonic(int level, Rng& rng) {
  const BetaIntervals iv = monotonic_beta_intervals(level);
  const int variant = uniform_int(rng, 1, 3);
  const bool upper = bernoulli(rng, 0.5);
  const double beta = upper ? uniform(rng, iv.upper_lo, iv.upper_hi)
                            : uniform(rng, iv.lower_lo, iv.lower_hi);
  return make_monotonic(variant, beta);
}

FunctionDescriptor make_spline_trend(std::vector<double> knot_values) {
  if (knot_values.size() < 4) {
    throw Error(ErrorCode::invalid_argument, "cubic spline trend needs at least 4 points");
  }
  std::sort(knot_values.begin(), knot_values.end());
  const int n = static_cast<int>(knot_values.size());
  return FunctionDescriptor{TrendSpline{CubicSpline(equidistant(n), std::move(knot_values))},
                            Saturation::input, 1.0};
}

FunctionDescriptor sample_spline_trend(int num_points, Rng& rng) {
  if (num_points < 4) {
    throw Error(ErrorCode::invalid_argument, "cubic spline trend needs at least 4 points");
  }
  std::vector<double> v(num_points);
  for (double& x : v) x = uniform(rng, -1.0, 1.0);
  return make_spline_trend(std::move(v));
}

double rbf_kernel(double a, double b, double length_scale) {
  const double d = a - b;
  return std::exp(-d * d / (2.0 * length_scale * length_scale));
}

FunctionDescriptor make_gp_draw(std::vector<double> anchor_values) {
  const int n = static_cast<int>(anchor_values.size());
  return FunctionDescriptor{GpDraw{CubicSpline(equidistant(n), std::move(anchor_values))},
                            Saturation::none, 1.0};
}

FunctionDescriptor sample_gp_rbf(Rng& rng) {
  const std::vector<double> x = equidistant(kGpAnchors);
  Eigen::MatrixXd k(kGpAnchors, kGpAnchors);
  for (int a = 0; a < kGpAnchors; ++a) {
    for (int b = 0; b < kGpAnchors; ++b) k(a, b) = rbf_kernel(x[a], x[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double jitter = 1e-9; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
    llt.compute(k + jitter * Eigen::MatrixXd::Identity(kGpAnchors, kGpAnchors));
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok) throw Error(ErrorCode::numeric, "GP kernel Cholesky failed after jitter escalation");

  Eigen::VectorXd z(kGpAnchors);
  for (int a = 0; a < kGpAnchors; ++a) z(a) = standard_normal(rng);
  const Eigen::VectorXd f = llt.matrixL() * z;
  return make_gp_draw(std::vector<double>(f.data(), f.data() + kGpAnchors));
}

FunctionDescriptor make_composite(const std::array<std::array<BaseFunction, 2>, 2>& chains,
                                  std::array<int, 2> signs) {
  return FunctionDescriptor{Composite{chains, signs}, Saturation::output, 1.0};
}

FunctionDescriptor sample_composite(Rng& rng) {
  std::array<std::array<BaseFunction, 2>, 2> chains{};
  std::array<int, 2> signs{};
  for (int j = 0; j < 2; ++j) {
    for (int s = 0; s < 2; ++s) {
      chains[j][s] = static_cast<BaseFunction>(uniform_int(rng, 0, kNumBaseFunctions - 1));
    }
    signs[j] = bernoulli(rng, 0.5) ? 1 : -1;
  }
  return make_composite(chains, signs);
}

Line optimal_line(const std::function<double(double)>& f, int nodes) {
  bool finite = true;
  const double ixf = simpson(
      [&](double x) {
        const double y = f(x);
        if (!std::isfinite(y)) finite = false;
        return x * y;
      },
      nodes);
  const double iff = simpson([&](double x) { return f(x); }, nodes);
  if (!finite || !std::isfinite(iff)) {
    throw Error(ErrorCode::numeric, "function is not finite on [-1, 1]");
  }
  return {1.5 * ixf, 0.5 * iff};
}

double nonlinearity_mse(const std::function<double(double)>& f, int nodes) {
  const Line line = optimal_line(f, nodes);
  const double v = 0.5 * simpson(
                             [&](double x) {
                               const double r = f(x) - (line.slope * x + line.intercept);
                               return r * r;
                             },
                             nodes);
  return std::max(v, 0.0);
}

}  // namespace tcda
