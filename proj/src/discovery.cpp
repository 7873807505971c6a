#include "tcda/discovery.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <filesystem>

#include "tcda/error.hpp"
#include "tcda/io.hpp"

namespace tcda {
namespace {

double abs_pearson(const double* a, const double* b, int n, int stride_a, int stride_b) {
  double ma = 0.0, mb = 0.0;
  for (int k = 0; k < n; ++k) {
    ma += a[k * stride_a];
    mb += b[k * stride_b];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int k = 0; k < n; ++k) {
    const double da = a[k * stride_a] - ma;
    const double db = b[k * stride_b] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return std::min(1.0, std::abs(sab) / std::sqrt(saa * sbb));
}

std::string offset_label(int offset) {
  if (offset == 0) return "lag+0";
  return offset > 0 ? "lag+" + std::to_string(offset) : "lag" + std::to_string(offset);
}

}  // namespace

void validate_scores(const ScoreGraph& g, int num_vars, int model_lags) {
  const auto& d = g.lagged.dims();
  if (d[0] != static_cast<std::size_t>(num_vars) || d[1] != static_cast<std::size_t>(num_vars) ||
      d[2] != static_cast<std::size_t>(model_lags)) {
    throw Error(ErrorCode::shape, "lagged scores have shape " + std::to_string(d[0]) + "x" +
                                      std::to_string(d[1]) + "x" + std::to_string(d[2]) +
                                      ", expected " + std::to_string(num_vars) + "x" +
                                      std::to_string(num_vars) + "x" + std::to_string(model_lags));
  }
  for (double v : g.lagged.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::numeric, "non-finite lagged score");
  }
  if (g.inst) {
    if (g.inst->rows() != num_vars || g.inst->cols() != num_vars) {
      throw Error(ErrorCode::shape, "instantaneous scores have the wrong shape");
    }
    if (!g.inst->allFinite()) throw Error(ErrorCode::numeric, "non-finite instantaneous score");
  }
}

ScoreGraph cross_correlation_scores(const Eigen::MatrixXd& x, int model_lags) {
  const int d = static_cast<int>(x.rows());
  const int t_len = static_cast<int>(x.cols());
  if (model_lags < 1) throw Error(ErrorCode::invalid_argument, "L_model must be >= 1");
  if (t_len <= model_lags + 2) throw Error(ErrorCode::invalid_argument, "series too short for L_model");
  ScoreGraph g;
  g.lagged = Tensor3(d, d, model_lags);
  // Eigen is column-major: consecutive time steps of one variable are d apart.
  const double* base = x.data();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int l = 1; l <= model_lags; ++l) {
        g.lagged(i, j, l - 1) = abs_pearson(base + j, base + i + static_cast<std::ptrdiff_t>(l) * d,
                                            t_len - l, d, d);
      }
    }
  }
  return g;
}

VarFit gvar_fit(const Eigen::MatrixXd& x, int model_lags) {
  const int d = static_cast<int>(x.rows());
  const int t_len = static_cast<int>(x.cols());
  if (model_lags < 1) throw Error(ErrorCode::invalid_argument, "L_model must be >= 1");
  const int n = t_len - model_lags;
  const int p = 1 + d * model_lags;
  if (n - p < 1) throw Error(ErrorCode::numeric, "too few samples for the VAR design");

  Eigen::MatrixXd design(n, p);
  Eigen::MatrixXd y(n, d);
  for (int r = 0; r < n; ++r) {
    const int t = r + model_lags;
    design(r, 0) = 1.0;
    for (int l = 1; l <= model_lags; ++l) {
      for (int j = 0; j < d; ++j) design(r, 1 + (l - 1) * d + j) = x(j, t - l);
    }
    y.row(r) = x.col(t).transpose();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw Error(ErrorCode::numeric, "rank-deficient VAR design");
  const Eigen::MatrixXd beta = qr.solve(y);
  const Eigen::MatrixXd gram_inv =
      (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  VarFit fit;
  fit.model_lags = model_lags;
  fit.dof = n - p;
  fit.coef = Tensor3(d, d, model_lags);
  fit.stderr_ = Tensor3(d, d, model_lags);
  fit.pvalue = Tensor3(d, d, model_lags);
  fit.intercept = beta.row(0).transpose();
  const boost::math::students_t dist(fit.dof);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd resid = y.col(i) - design * beta.col(i);
    const double sigma2 = resid.squaredNorm() / fit.dof;
    for (int l = 1; l <= model_lags; ++l) {
      for (int j = 0; j < d; ++j) {
        const int c = 1 + (l - 1) * d + j;
        const double b = beta(c, i);
        const double se = std::sqrt(std::max(sigma2 * gram_inv(c, c), 0.0));
        double pv;
        if (se > 0.0) {
          pv = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(b) / se));
        } else {
          pv = b == 0.0 ? 1.0 : 0.0;
        }
        fit.coef(i, j, l - 1) = b;
        fit.stderr_(i, j, l - 1) = se;
        fit.pvalue(i, j, l - 1) = std::clamp(pv, 0.0, 1.0);
      }
    }
  }
  return fit;
}

ScoreGraph gvar_scores(const VarFit& fit, GvarMode mode) {
  ScoreGraph g;
  g.lagged = Tensor3(fit.coef.dim(0), fit.coef.dim(1), fit.coef.dim(2));
  auto out = g.lagged.values();
  const auto coef = fit.coef.values();
  const auto pv = fit.pvalue.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = mode == GvarMode::coef ? std::abs(coef[k]) : 1.0 - pv[k];
  }
  return g;
}

int MethodSpec::model_lags(int true_lags) const { return std::max(1, true_lags + lag_offset); }

std::vector<MethodSpec> baseline_grid() {
  std::vector<MethodSpec> out;
  for (int off : {-2, 0, 2}) {
    out.push_back({kCrossCorrelation, offset_label(off), false, BaselineKind::cross_correlation, off,
                   GvarMode::coef});
  }
  for (GvarMode m : {GvarMode::coef, GvarMode::pval}) {
    for (int off : {-2, 0, 2}) {
      const std::string hp = std::string(m == GvarMode::coef ? "coef_" : "pval_") + offset_label(off);
      out.push_back({kGvar, hp, false, BaselineKind::gvar, off, m});
    }
  }
  return out;
}

std::vector<MethodSpec> baseline_grid(const std::string& method) {
  std::vector<MethodSpec> out;
  for (auto& s : baseline_grid()) {
    if (s.method == method) out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::config, "unknown baseline method: " + method);
  return out;
}

MethodSpec find_baseline(const std::string& method, const std::string& hp) {
  for (auto& s : baseline_grid(method)) {
    if (s.hp == hp) return s;
  }
  throw Error(ErrorCode::config, "unknown hyperparameter " + hp + " for " + method);
}

MethodSpec external_method(const std::string& method, const std::string& hp) {
  MethodSpec s;
  s.method = method;
  s.hp = hp;
  s.external = true;
  return s;
}

ScoreGraph run_baseline(const MethodSpec& spec, const Eigen::MatrixXd& x, int true_lags) {
  if (spec.external) throw Error(ErrorCode::invalid_argument, spec.method + " is not a native baseline");
  const int lags = spec.model_lags(true_lags);
  ScoreGraph g = spec.kind == BaselineKind::cross_correlation
                     ? cross_correlation_scores(x, lags)
                     : gvar_scores(gvar_fit(x, lags), spec.mode);
  g.method = spec.method;
  g.hp = spec.hp;
  return g;
}

ScoreGraph ingest_external(const std::string& stem, int num_vars, int model_lags) {
  ScoreGraph g;
  g.lagged = to_tensor3(read_tensor(stem + ".lagged.tcda"));
  const std::string inst_path = stem + ".inst.tcda";
  if (std::filesystem::exists(inst_path)) g.inst = to_matrix(read_tensor(inst_path));
  validate_scores(g, num_vars, model_lags);
  return g;
}

}  // namespace tcda
