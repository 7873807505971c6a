#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tcda/rng.hpp"

namespace tcda {

enum class NoiseKind { add, mul, time, autoreg, common, shock, real, uniform, weibull, unequal_var };

const char* noise_kind_name(NoiseKind kind);

struct NoiseParams {
  double auto_alpha = 0.5;
  double time_alpha = 0.01;
  double time_beta = 730.0;
  double shock_size = 5.0;
  double shock_prob = 0.05;
  double weibull_scale = 1.0;
  double weibull_shape = 1.5;
  double uniform_lo = -2.0;
  double uniform_hi = 2.0;
};

// High-passed, standardized real-valued channels used by the `real` kernels
// and as the auxiliary series for MAR missingness.
class ExogenousPool {
 public:
  ExogenousPool() = default;
  explicit ExogenousPool(std::vector<std::vector<double>> channels);

  // One channel per CSV column; a non-numeric first row is treated as header.
  static ExogenousPool from_csv(const std::string& path, double cutoff = 0.1);
  // Stand-in when no file is configured: seeded random walks, high-passed.
  static ExogenousPool synthetic(std::uint64_t seed, int length = 20000, int channels = 1,
                                 double cutoff = 0.1);

  const std::vector<std::vector<double>>& channels() const { return channels_; }
  std::size_t shortest() const;
  bool empty() const { return channels_.empty(); }

  // `rows` windows of length `length`, each from a random channel and offset.
  Eigen::MatrixXd draw(int rows, int length, Rng& rng) const;

 private:
  std::vector<std::vector<double>> channels_;
};

class NoiseKernel {
 public:
  NoiseKernel(NoiseKind kind, int num_vars, NoiseParams params = {},
              const ExogenousPool* pool = nullptr, std::vector<double> variances = {});

  // Required before stepping a `real` kernel: fixes each variable's pool window.
  void bind_horizon(int horizon, Rng& rng);

  // One draw for every variable at step t. `signal` is only read by `mul`.
  Eigen::VectorXd step(int t, const Eigen::VectorXd& signal, Rng& rng);

  NoiseKind kind() const { return kind_; }

 private:
  NoiseKind kind_;
  int num_vars_;
  NoiseParams params_;
  const ExogenousPool* pool_;
  std::vector<double> variances_;
  Eigen::VectorXd previous_;
  Eigen::MatrixXd window_;
};

// Root mean square of the time kernel's envelope (1 + a t) sin(2 pi t / b)
// over steps [first, last).
double time_envelope_rms(const NoiseParams& params, int first, int last);

// Base noise for a whole D x T observation matrix; `signal` drives `mul`.
Eigen::MatrixXd sample_noise(NoiseKind kind, const Eigen::MatrixXd& signal, Rng& rng,
                             const NoiseParams& params = {},
                             const ExogenousPool* pool = nullptr);

// alpha * noise with alpha = sqrt((P_X / snr) / P_noise).
Eigen::MatrixXd scale_to_snr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& noise, double snr);
double mean_power(const Eigen::MatrixXd& m);

// alpha * violating + (1 - alpha) * N(0, 1).
Eigen::MatrixXd blend_structured(const Eigen::MatrixXd& violating, double alpha, Rng& rng);

enum class NonGaussian { uniform, weibull };

struct Moments {
  double mean;
  double variance;
};
Moments non_gaussian_moments(NonGaussian dist, const NoiseParams& params = {});

// Unit-variance mix of a centered non-Gaussian draw and a standard normal.
// alpha is the weight on the non-Gaussian part (w = 1 - alpha below).
double blend_non_gaussian(NonGaussian dist, double alpha, Rng& rng,
                          const NoiseParams& params = {});
Eigen::MatrixXd blend_non_gaussian(NonGaussian dist, double alpha, int rows, int cols, Rng& rng,
                                   const NoiseParams& params = {});

struct VarianceIntervals {
  double lower_lo, lower_hi, upper_lo, upper_hi;
};
VarianceIntervals unequal_variance_intervals(int level);
std::vector<double> sample_unequal_variances(int level, int num_vars, Rng& rng);

// Zero-phase second-order Butterworth high-pass. `cutoff` is in cycles per
// sample, so the Nyquist frequency is 0.5.
std::vector<double> highpass_extract(const std::vector<double>& series, double cutoff);

}  // namespace tcda
