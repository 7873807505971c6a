#include "tcda/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tcda/error.hpp"

namespace tcda {
namespace {

void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
}

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) return false;
    const char* begin = cell.c_str() + first;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) return false;
    out.push_back(v);
  }
  return !out.empty();
}

// Direct form II transposed, second order, with initial state z.
std::vector<double> lfilter2(const double b[3], const double a[3], const std::vector<double>& x,
                             double z0, double z1) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = b[0] * x[n] + z0;
    z0 = b[1] * x[n] - a[1] * out + z1;
    z1 = b[2] * x[n] - a[2] * out;
    y[n] = out;
  }
  return y;
}

}  // namespace

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::add: return "add";
    case NoiseKind::mul: return "mul";
    case NoiseKind::time: return "time";
    case NoiseKind::autoreg: return "auto";
    case NoiseKind::common: return "com";
    case NoiseKind::shock: return "shock";
    case NoiseKind::real: return "real";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::weibull: return "weibull";
    case NoiseKind::unequal_var: return "unequal_var";
  }
  return "?";
}

ExogenousPool::ExogenousPool(std::vector<std::vector<double>> channels)
    : channels_(std::move(channels)) {}

ExogenousPool ExogenousPool::from_csv(const std::string& path, double cutoff) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open exogenous series: " + path);
  std::vector<std::vector<double>> cols;
  std::string line;
  std::vector<double> row;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::format, "non-numeric row in " + path);
    }
    first = false;
    if (cols.empty()) cols.resize(row.size());
    if (row.size() != cols.size()) throw Error(ErrorCode::format, "ragged rows in " + path);
    for (std::size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
  }
  if (cols.empty()) throw Error(ErrorCode::format, "no data in " + path);
  for (auto& c : cols) {
    c = highpass_extract(c, cutoff);
    standardize(c);
  }
  return ExogenousPool(std::move(cols));
}

ExogenousPool ExogenousPool::synthetic(std::uint64_t seed, int length, int channels,
                                       double cutoff) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(channels);
  for (auto& c : cols) {
    c.resize(length);
    double level = 0.0;
    for (double& v : c) {
      level += standard_normal(rng);
      v = level;
    }
    c = highpass_extract(c, cutoff);
    standardize(c);
  }
  return ExogenousPool(std::move(cols));
}

std::size_t ExogenousPool::shortest() const {
  std::size_t n = channels_.empty() ? 0 : channels_.front().size();
  for (const auto& c : channels_) n = std::min(n, c.size());
  return n;
}

Eigen::MatrixXd ExogenousPool::draw(int rows, int length, Rng& rng) const {
  if (channels_.empty()) throw Error(ErrorCode::config, "exogenous pool is empty");
  Eigen::MatrixXd out(rows, length);
  for (int r = 0; r < rows; ++r) {
    const auto& ch = channels_[uniform_int(rng, 0, static_cast<int>(channels_.size()) - 1)];
    if (ch.size() < static_cast<std::size_t>(length)) {
      throw Error(ErrorCode::config, "exogenous pool shorter than requested window");
    }
    const int offset = uniform_int(rng, 0, static_cast<int>(ch.size()) - length);
    for (int t = 0; t < length; ++t) out(r, t) = ch[offset + t];
  }
  return out;
}

NoiseKernel::NoiseKernel(NoiseKind kind, int num_vars, NoiseParams params,
                         const ExogenousPool* pool, std::vector<double> variances)
    : kind_(kind),
      num_vars_(num_vars),
      params_(params),
      pool_(pool),
      variances_(std::move(variances)),
      previous_(Eigen::VectorXd::Zero(num_vars)) {
  if (kind_ == NoiseKind::real && (pool_ == nullptr || pool_->empty())) {
    throw Error(ErrorCode::config, "real noise kernel needs an exogenous pool");
  }
  if (kind_ == NoiseKind::unequal_var && static_cast<int>(variances_.size()) != num_vars_) {
    throw Error(ErrorCode::invalid_argument, "one variance per variable required");
  }
}

void NoiseKernel::bind_horizon(int horizon, Rng& rng) {
  if (kind_ != NoiseKind::real) return;
  window_ = pool_->draw(num_vars_, horizon, rng);
}

Eigen::VectorXd NoiseKernel::step(int t, const Eigen::VectorXd& signal, Rng& rng) {
  if (t < 0) throw Error(ErrorCode::invalid_argument, "negative time step");
  Eigen::VectorXd out(num_vars_);
  switch (kind_) {
    case NoiseKind::add:
      for (int i = 0; i < num_vars_; ++i) out(i) = standard_normal(rng);
      break;
    case NoiseKind::mul:
      if (signal.size() != num_vars_) throw Error(ErrorCode::shape, "mul kernel needs a signal");
      for (int i = 0; i < num_vars_; ++i) out(i) = signal(i) * standard_normal(rng);
      break;
    case NoiseKind::time: {
      const double amp = (1.0 + params_.time_alpha * t) *
                         std::sin(2.0 * std::numbers::pi * t / params_.time_beta);
      for (int i = 0; i < num_vars_; ++i) out(i) = amp * standard_normal(rng);
      break;
    }
    case NoiseKind::autoreg:
      for (int i = 0; i < num_vars_; ++i) {
        out(i) = params_.auto_alpha * previous_(i) + (1.0 - params_.auto_alpha) * standard_normal(rng);
      }
      previous_ = out;
      break;
    case NoiseKind::common:
      out.setConstant(standard_normal(rng));
      break;
    case NoiseKind::shock:
      for (int i = 0; i < num_vars_; ++i) {
        out(i) = bernoulli(rng, params_.shock_prob) ? params_.shock_size : 0.0;
      }
      break;
    case NoiseKind::real:
      if (window_.cols() <= t || window_.rows() != num_vars_) {
        throw Error(ErrorCode::config, "exogenous pool window exhausted");
      }
      out = window_.col(t);
      break;
    case NoiseKind::uniform:
      for (int i = 0; i < num_vars_; ++i) out(i) = uniform(rng, params_.uniform_lo, params_.uniform_hi);
      break;
    case NoiseKind::weibull: {
      std::weibull_distribution<double> w(params_.weibull_shape, params_.weibull_scale);
      for (int i = 0; i < num_vars_; ++i) out(i) = w(rng);
      break;
    }
    case NoiseKind::unequal_var:
      for (int i = 0; i < num_vars_; ++i) out(i) = std::sqrt(variances_[i]) * standard_normal(rng);
      break;
  }
  return out;
}

double time_envelope_rms(const NoiseParams& p, int first, int last) {
  if (last <= first) return 0.0;
  double acc = 0.0;
  for (int t = first; t < last; ++t) {
    const double amp = (1.0 + p.time_alpha * t) * std::sin(2.0 * std::numbers::pi * t / p.time_beta);
    acc += amp * amp;
  }
  return std::sqrt(acc / (last - first));
}

Eigen::MatrixXd sample_noise(NoiseKind kind, const Eigen::MatrixXd& signal, Rng& rng,
                             const NoiseParams& params, const ExogenousPool* pool) {
  const int d = static_cast<int>(signal.rows());
  const int t_len = static_cast<int>(signal.cols());
  NoiseKernel kernel(kind, d, params, pool);
  kernel.bind_horizon(t_len, rng);
  Eigen::MatrixXd out(d, t_len);
  for (int t = 0; t < t_len; ++t) out.col(t) = kernel.step(t, signal.col(t), rng);
  return out;
}

double mean_power(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.squaredNorm() / static_cast<double>(m.size());
}

Eigen::MatrixXd scale_to_snr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& noise, double snr) {
  if (!(snr > 0.0)) throw Error(ErrorCode::invalid_argument, "snr must be positive");
  if (x.rows() != noise.rows() || x.cols() != noise.cols()) {
    throw Error(ErrorCode::shape, "signal and noise shapes differ");
  }
  const double px = mean_power(x);
  const double pn = mean_power(noise);
  if (!(px > 0.0) || !(pn > 0.0)) throw Error(ErrorCode::numeric, "zero-power signal or noise");
  return std::sqrt((px / snr) / pn) * noise;
}

Eigen::MatrixXd blend_structured(const Eigen::MatrixXd& violating, double alpha, Rng& rng) {
  if (alpha < 0.0 || alpha > 1.0) throw Error(ErrorCode::invalid_argument, "alpha must be in [0, 1]");
  Eigen::MatrixXd out(violating.rows(), violating.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      out(r, c) = alpha * violating(r, c) + (1.0 - alpha) * standard_normal(rng);
    }
  }
  return out;
}

Moments non_gaussian_moments(NonGaussian dist, const NoiseParams& p) {
  if (dist == NonGaussian::uniform) {
    const double w = p.uniform_hi - p.uniform_lo;
    return {0.5 * (p.uniform_lo + p.uniform_hi), w * w / 12.0};
  }
  const double g1 = std::tgamma(1.0 + 1.0 / p.weibull_shape);
  const double g2 = std::tgamma(1.0 + 2.0 / p.weibull_shape);
  const double s = p.weibull_scale;
  return {s * g1, s * s * (g2 - g1 * g1)};
}

double blend_non_gaussian(NonGaussian dist, double alpha, Rng& rng, const NoiseParams& p) {
  if (alpha < 0.0 || alpha > 1.0) throw Error(ErrorCode::invalid_argument, "alpha must be in [0, 1]");
  const Moments m = non_gaussian_moments(dist, p);
  const double w = 1.0 - alpha;
  double omega;
  if (dist == NonGaussian::uniform) {
    omega = uniform(rng, p.uniform_lo, p.uniform_hi);
  } else {
    omega = std::weibull_distribution<double>(p.weibull_shape, p.weibull_scale)(rng);
  }
  const double psi = standard_normal(rng);
  const double norm = std::sqrt(m.variance * (1.0 - 2.0 * w) + w * w * (m.variance + 1.0));
  return ((1.0 - w) * (omega - m.mean) + w * psi) / norm;
}

Eigen::MatrixXd blend_non_gaussian(NonGaussian dist, double alpha, int rows, int cols, Rng& rng,
                                   const NoiseParams& params) {
  Eigen::MatrixXd out(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) out(r, c) = blend_non_gaussian(dist, alpha, rng, params);
  }
  return out;
}

VarianceIntervals unequal_variance_intervals(int level) {
  if (level < 1 || level > 5) throw Error(ErrorCode::invalid_argument, "violation level must be in 1..5");
  static constexpr VarianceIntervals table[5] = {
      {0.55, 0.75, 1.25, 1.45},
      {0.4125, 0.6125, 1.3875, 1.5875},
      {0.275, 0.475, 1.525, 1.725},
      {0.1375, 0.3375, 1.6625, 1.8625},
      {0.0, 0.2, 1.8, 2.0},
  };
  return table[level - 1];
}

std::vector<double> sample_unequal_variances(int level, int num_vars, Rng& rng) {
  const VarianceIntervals iv = unequal_variance_intervals(level);
  std::vector<double> out(num_vars);
  for (double& v : out) {
    v = bernoulli(rng, 0.5) ? uniform(rng, iv.upper_lo, iv.upper_hi)
                            : uniform(rng, iv.lower_lo, iv.lower_hi);
  }
  return out;
}

std::vector<double> highpass_extract(const std::vector<double>& series, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "cutoff must lie in (0, 0.5) cycles per sample");
  }
  constexpr std::size_t kPad = 9;  // 3 * (filter order + 1)
  if (series.size() < 12) throw Error(ErrorCode::invalid_argument, "series needs at least 12 samples");

  // Bilinear transform of the analog prototype with prewarped cutoff.
  const double k = std::tan(std::numbers::pi * cutoff);
  const double norm = 1.0 + std::numbers::sqrt2 * k + k * k;
  const double b[3] = {1.0 / norm, -2.0 / norm, 1.0 / norm};
  const double a[3] = {1.0, 2.0 * (k * k - 1.0) / norm, (1.0 - std::numbers::sqrt2 * k + k * k) / norm};

  // Steady-state response to a unit step, scaled by the first sample.
  const double y_ss = (b[0] + b[1] + b[2]) / (a[0] + a[1] + a[2]);
  const double zi1 = b[2] - a[2] * y_ss;
  const double zi0 = b[1] - a[1] * y_ss + zi1;

  const std::size_t n = series.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * kPad);
  for (std::size_t i = kPad; i >= 1; --i) ext.push_back(2.0 * series[0] - series[i]);
  ext.insert(ext.end(), series.begin(), series.end());
  for (std::size_t i = 1; i <= kPad; ++i) ext.push_back(2.0 * series[n - 1] - series[n - 1 - i]);

  std::vector<double> fwd = lfilter2(b, a, ext, zi0 * ext.front(), zi1 * ext.front());
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = lfilter2(b, a, fwd, zi0 * fwd.front(), zi1 * fwd.front());
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + kPad, bwd.begin() + kPad + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace tcda
