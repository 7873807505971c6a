#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tcda/functions.hpp"
#include "tcda/tensor.hpp"

namespace tcda {

// Data-generating configuration. D and L come paired: (5, 3) or (7, 4).
struct Regime {
  int num_vars = 5;
  int max_lag = 3;
  int length = 250;
  double p_lag = 0.075;
  double p_inst = 0.0;

  // Stable text key, e.g. "D5L3-T250-P0.075-I0.1".
  std::string id() const;
  bool operator==(const Regime&) const = default;
};

// The 16 default regimes (2 sizes x 2 lengths x 2 p_lag x 2 p_inst).
std::vector<Regime> default_regimes();

double expected_link_count(const Regime& regime);

enum class InnovationKind {
  gaussian, mul, time, autoreg, common, shock, real, uniform, weibull, unequal_var,
};

struct InnovationConfig {
  InnovationKind kind = InnovationKind::gaussian;
  double alpha = 0.0;             // weight on the violating component
  std::vector<double> variances;  // unequal_var only
};

// Lagged coefficients active from step `start` onward.
struct LaggedSegment {
  int start = 0;
  Tensor3 coefficients;  // (target, source, lag - 1)
};

// Exogenous standard-normal parents acting at the same step.
struct InstConfounding {
  Eigen::MatrixXd links;  // num_vars x num_latent
};

struct ScmSpec {
  int num_vars = 0;
  int max_lag = 0;
  std::vector<LaggedSegment> lagged;  // at least one, first starts at 0
  Eigen::MatrixXd inst;               // B, (target, source)
  // Mechanism per slot; slot 0 is instantaneous, slot l is lag l.
  std::vector<FunctionDescriptor> functions;
  InnovationConfig innovation;
  std::optional<InstConfounding> inst_confounding;
  // Index of the lagged confounder removed from the observation.
  std::optional<int> hidden;

  const FunctionDescriptor& function(int target, int source, int slot) const {
    return functions[(static_cast<std::size_t>(target) * num_vars + source) * (max_lag + 1) + slot];
  }
  FunctionDescriptor& function(int target, int source, int slot) {
    return functions[(static_cast<std::size_t>(target) * num_vars + source) * (max_lag + 1) + slot];
  }
  const Tensor3& base_lagged() const { return lagged.front().coefficients; }
};

ScmSpec make_linear_scm(Tensor3 lagged, Eigen::MatrixXd inst);

struct GroundTruth {
  Tensor3 lwcg;        // binary, (target, source, lag - 1)
  Eigen::MatrixXd inst;  // binary
  Eigen::MatrixXd lsg;   // binary

  bool operator==(const GroundTruth& o) const {
    return lwcg == o.lwcg && inst == o.inst && lsg == o.lsg;
  }
};

// Support over all lagged segments (union).
Tensor3 project_lwcg(const ScmSpec& scm);
Eigen::MatrixXd project_lsg(const Tensor3& lwcg);
Eigen::MatrixXd project_inst(const ScmSpec& scm);
GroundTruth project_truth(const ScmSpec& scm);

// Drops variable `index` from every projection.
GroundTruth remove_variable(const GroundTruth& truth, int index);

// exp(M) via scaling and squaring with a degree-6 Pade approximant.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

inline constexpr double kAcyclicTolerance = 1e-8;
// trace(exp(B o B)) == D within tolerance.
bool check_acyclic(const Eigen::MatrixXd& inst);

// Companion matrix of a D x D x L lagged tensor.
Eigen::MatrixXd companion_matrix(const Tensor3& lagged);
double spectral_radius(const Eigen::MatrixXd& m);

inline constexpr double kStabilityMargin = 1e-9;
bool check_var_stable(const Tensor3& lagged);

// Topological order of the support of B; throws when cyclic.
std::vector<int> topological_order(const Eigen::MatrixXd& inst);

}  // namespace tcda
