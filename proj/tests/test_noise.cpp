#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "doctest.h"
#include "tcda/error.hpp"
#include "tcda/noise.hpp"

using namespace tcda;

namespace {

struct Stats {
  double mean, var, skew;
};

Stats stats(const Eigen::MatrixXd& m) {
  const double n = static_cast<double>(m.size());
  const double mean = m.mean();
  const Eigen::ArrayXXd c = m.array() - mean;
  const double var = (c * c).sum() / n;
  const double skew = (c * c * c).sum() / n / std::pow(var, 1.5);
  return {mean, var, skew};
}

}  // namespace

TEST_CASE("time kernel vanishes at t = 0") {
  Rng rng(1);
  NoiseKernel k(NoiseKind::time, 4);
  CHECK(k.step(0, Eigen::VectorXd::Zero(4), rng).isZero(0.0));
}

TEST_CASE("multiplicative kernel with zero signal") {
  Rng rng(1);
  NoiseKernel k(NoiseKind::mul, 3);
  for (int t = 0; t < 20; ++t) CHECK(k.step(t, Eigen::VectorXd::Zero(3), rng).isZero(0.0));
}

TEST_CASE("shock frequency and size") {
  Rng rng(4);
  NoiseKernel k(NoiseKind::shock, 10);
  long nonzero = 0, total = 0;
  bool sizes_ok = true;
  for (int t = 0; t < 100000; ++t) {
    const Eigen::VectorXd v = k.step(t, Eigen::VectorXd::Zero(10), rng);
    for (double x : v) {
      ++total;
      if (x != 0.0) {
        ++nonzero;
        sizes_ok = sizes_ok && x == 5.0;
      }
    }
  }
  CHECK(sizes_ok);
  CHECK(static_cast<double>(nonzero) / total == doctest::Approx(0.05).epsilon(0.003 / 0.05));
}

TEST_CASE("common kernel repeats one value across variables") {
  Rng rng(9);
  NoiseKernel k(NoiseKind::common, 5);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd v = k.step(t, Eigen::VectorXd::Zero(5), rng);
    CHECK((v.array() == v(0)).all());
  }
}

TEST_CASE("autoregressive kernel lag-one correlation") {
  // z_t = a z_{t-1} + (1 - a) e_t is AR(1) with coefficient a.
  Rng rng(12);
  NoiseKernel k(NoiseKind::autoreg, 1);
  const int n = 1000000;
  std::vector<double> z(n);
  for (int t = 0; t < n; ++t) z[t] = k.step(t, Eigen::VectorXd::Zero(1), rng)(0);
  double m = 0;
  for (double v : z) m += v;
  m /= n;
  double num = 0, den = 0;
  for (int t = 0; t < n; ++t) {
    den += (z[t] - m) * (z[t] - m);
    if (t > 0) num += (z[t] - m) * (z[t - 1] - m);
  }
  CHECK(num / den == doctest::Approx(0.5).epsilon(0.02 / 0.5));
}

TEST_CASE("kernels replay under a fixed seed") {
  for (NoiseKind kind : {NoiseKind::add, NoiseKind::mul, NoiseKind::time, NoiseKind::autoreg,
                         NoiseKind::common, NoiseKind::shock}) {
    Rng a(77), b(77);
    const Eigen::MatrixXd signal = Eigen::MatrixXd::Constant(3, 50, 0.7);
    CHECK(sample_noise(kind, signal, a) == sample_noise(kind, signal, b));
  }
}

TEST_CASE("snr scaling") {
  Rng rng(5);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 300);
  Eigen::MatrixXd z = Eigen::MatrixXd::Random(4, 300);
  z *= std::sqrt(mean_power(x) / mean_power(z));
  const Eigen::MatrixXd same = scale_to_snr(x, z, 1.0);
  CHECK((same - z).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::MatrixXd two = Eigen::MatrixXd::Constant(1, 4, 2.0);  // power 4
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 4, -1.0);  // power 1
  const Eigen::MatrixXd scaled = scale_to_snr(two, one, 2.0);
  CHECK(scaled(0, 0) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));

  for (double snr : {0.05, 0.3125, 1.1, 10.0}) {
    const Eigen::MatrixXd out = scale_to_snr(x, z, snr);
    CHECK(std::abs(mean_power(x) / mean_power(out) - snr) < 1e-9);
    // Homogeneous in the base noise.
    CHECK((scale_to_snr(x, 3.7 * z, snr) - out).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(scale_to_snr(x, Eigen::MatrixXd::Zero(4, 300), 1.0), Error);
  CHECK_THROWS_AS(scale_to_snr(x, z, 0.0), Error);
}

TEST_CASE("structured blend endpoints") {
  Rng rng(6);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(3, 1000, 2.5);
  CHECK(blend_structured(v, 1.0, rng) == v);
  const Stats s = stats(blend_structured(Eigen::MatrixXd::Zero(10, 10000), 0.0, rng));
  CHECK(std::abs(s.mean) < 0.02);
  CHECK(std::abs(s.var - 1.0) < 0.02);
}

TEST_CASE("non-gaussian moments") {
  const Moments u = non_gaussian_moments(NonGaussian::uniform);
  CHECK(u.mean == 0.0);
  CHECK(u.variance == doctest::Approx(4.0 / 3));
  const Moments w = non_gaussian_moments(NonGaussian::weibull);
  const double g1 = boost::math::tgamma(1.0 + 2.0 / 3), g2 = boost::math::tgamma(1.0 + 4.0 / 3);
  CHECK(w.mean == doctest::Approx(g1).epsilon(1e-12));
  CHECK(w.variance == doctest::Approx(g2 - g1 * g1).epsilon(1e-12));
}

TEST_CASE("non-gaussian blend is standardized") {
  Rng rng(21);
  for (NonGaussian d : {NonGaussian::uniform, NonGaussian::weibull}) {
    for (double alpha : {0.0, 0.5, 1.0}) {
      const Stats s = stats(blend_non_gaussian(d, alpha, 1000, 1000, rng));
      CHECK(std::abs(s.mean) < 0.005);
      CHECK(std::abs(s.var - 1.0) < 0.02);
    }
  }
  // Standardized Weibull(1.5) skewness.
  const double g1 = boost::math::tgamma(1.0 + 1.0 / 1.5), g2 = boost::math::tgamma(1.0 + 2.0 / 1.5),
               g3 = boost::math::tgamma(1.0 + 3.0 / 1.5);
  const double skew = (g3 - 3 * g1 * g2 + 2 * g1 * g1 * g1) / std::pow(g2 - g1 * g1, 1.5);
  const Stats s = stats(blend_non_gaussian(NonGaussian::weibull, 1.0, 1000, 1000, rng));
  CHECK(std::abs(s.skew - skew) < 0.05);
}

TEST_CASE("unequal variance intervals") {
  const VarianceIntervals one = unequal_variance_intervals(1);
  CHECK(one.lower_lo == doctest::Approx(0.55));
  CHECK(one.upper_hi == doctest::Approx(1.45));
  const VarianceIntervals five = unequal_variance_intervals(5);
  CHECK(five.lower_lo == 0.0);
  CHECK(five.upper_hi == doctest::Approx(2.0));

  Rng rng(3);
  for (double v : sample_unequal_variances(1, 1000, rng)) {
    CHECK(((v >= 0.55 && v <= 0.75) || (v >= 1.25 && v <= 1.45)));
  }
  for (int level = 1; level <= 5; ++level) {
    const auto v = sample_unequal_variances(level, 100000, rng);
    double m = 0;
    for (double x : v) m += x;
    CHECK(m / v.size() == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("high-pass extraction") {
  CHECK_THROWS_AS(highpass_extract(std::vector<double>(11, 1.0), 0.1), Error);
  CHECK_THROWS_AS(highpass_extract(std::vector<double>(100, 1.0), 0.5), Error);

  for (double v : highpass_extract(std::vector<double>(500, 3.2), 0.1)) CHECK(std::abs(v) < 1e-9);

  const int n = 4000;
  std::vector<double> sine(n);
  for (int t = 0; t < n; ++t) sine[t] = std::sin(2 * M_PI * 0.3 * t);
  const auto hp = highpass_extract(sine, 0.1);
  double amp = 0;
  for (int t = n / 4; t < 3 * n / 4; ++t) amp = std::max(amp, std::abs(hp[t]));
  CHECK(amp == doctest::Approx(1.0).epsilon(0.05));

  Rng rng(14);
  std::vector<double> walk(n);
  double acc = 0;
  for (double& v : walk) v = acc += standard_normal(rng);
  const auto out = highpass_extract(walk, 0.1);
  auto var = [&](int lo, int hi) {
    double m = 0, s = 0;
    for (int t = lo; t < hi; ++t) m += out[t];
    m /= hi - lo;
    for (int t = lo; t < hi; ++t) s += (out[t] - m) * (out[t] - m);
    return s / (hi - lo);
  };
  const double ratio = var(0, n / 2) / var(n / 2, n);
  CHECK(ratio < 2.0);
  CHECK(ratio > 0.5);
}
