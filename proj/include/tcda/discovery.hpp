#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tcda/tensor.hpp"

namespace tcda {

struct ScoreGraph {
  Tensor3 lagged;                      // (target, source, lag - 1), D x D x L_model
  std::optional<Eigen::MatrixXd> inst;  // absent for lag-only methods
  std::string method;
  std::string hp;
  std::string sample;

  int num_vars() const { return static_cast<int>(lagged.dim(0)); }
  int model_lags() const { return static_cast<int>(lagged.dim(2)); }
};

// Throws unless shapes match and every entry is finite.
void validate_scores(const ScoreGraph& g, int num_vars, int model_lags);

// |corr(X_j[0 .. T-l), X_i[l .. T))| for l = 1..L_model; x is D x T.
ScoreGraph cross_correlation_scores(const Eigen::MatrixXd& x, int model_lags);

struct VarFit {
  int model_lags = 0;
  int dof = 0;
  Tensor3 coef;
  Tensor3 stderr_;
  Tensor3 pvalue;
  Eigen::VectorXd intercept;
};

// Per-target OLS on all lagged regressors plus an intercept, two-sided
// Student-t p-values with T - L - D L - 1 degrees of freedom.
VarFit gvar_fit(const Eigen::MatrixXd& x, int model_lags);

enum class GvarMode { coef, pval };
ScoreGraph gvar_scores(const VarFit& fit, GvarMode mode);

enum class BaselineKind { cross_correlation, gvar };

// One method / hyperparameter combination. Baselines run natively; anything
// else is read from an external prediction directory.
struct MethodSpec {
  std::string method;
  std::string hp;
  bool external = false;
  BaselineKind kind = BaselineKind::cross_correlation;
  int lag_offset = 0;  // L_model = max(1, L + lag_offset)
  GvarMode mode = GvarMode::coef;

  int model_lags(int true_lags) const;
};

inline const std::string kCrossCorrelation = "cross_corr";
inline const std::string kGvar = "gvar";

// Native hyperparameter grid: L_model in {L-2, L, L+2}, GVAR also coef|pval.
std::vector<MethodSpec> baseline_grid();
std::vector<MethodSpec> baseline_grid(const std::string& method);
MethodSpec find_baseline(const std::string& method, const std::string& hp);
MethodSpec external_method(const std::string& method, const std::string& hp);

ScoreGraph run_baseline(const MethodSpec& spec, const Eigen::MatrixXd& x, int true_lags);

// Reads `<stem>.lagged.tcda` and, when present, `<stem>.inst.tcda`.
ScoreGraph ingest_external(const std::string& stem, int num_vars, int model_lags);

}  // namespace tcda
