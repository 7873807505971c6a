#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tcda/noise.hpp"
#include "tcda/rng.hpp"
#include "tcda/scm.hpp"
#include "tcda/violations.hpp"

namespace tcda {

struct GeneratorOptions {
  double coef_lo = 0.3;
  double coef_hi = 0.5;
  double confounder_lo = 0.8;
  double confounder_hi = 0.9;
  int num_inst_confounders = 2;
  int retry_budget = 1000;
  // Coefficient redraws with a fixed support before the support is redrawn.
  int coefficient_retries = 50;
  double guard_bound = 25.0;
  int guard_window = 10;
  NoiseParams noise;
  // Needed by obs_real, inno_real and mar.
  const ExogenousPool* pool = nullptr;
};

// Shared retry counter for one sample; throws once the budget is spent.
class RetryBudget {
 public:
  explicit RetryBudget(int limit) : limit_(limit) {}
  void spend(const char* what);
  int used() const { return used_; }

 private:
  int limit_;
  int used_ = 0;
};

struct SampleRecord {
  Regime regime;
  CompositeConfig violation;
  std::uint64_t seed = 0;
  int index = 0;
  ScmSpec scm;
  Eigen::MatrixXd x;  // D x T, observed
  GroundTruth truth;
  int attempts = 0;
};

// Where a faithfulness-violating triple was placed (-1 when none).
struct FaithTriple {
  int j = -1, k = -1, i = -1;
};

ScmSpec sample_scm(const Regime& regime, const CompositeConfig& violation, Rng& rng,
                   const GeneratorOptions& options, RetryBudget& budget,
                   FaithTriple* faith = nullptr);

// Simulates every variable of the SCM (hidden ones included). Throws
// DivergenceError when a guard fires.
Eigen::MatrixXd simulate(const ScmSpec& scm, int length, const CompositeConfig& violation,
                         Rng& rng, const GeneratorOptions& options);

// Link counts of one fresh support draw for the regime, before the diagonal
// and acyclicity filters act on the instantaneous part.
struct SupportDraw {
  int lagged = 0;
  int inst = 0;
};
SupportDraw draw_support_counts(const Regime& regime, Rng& rng);

bool guard_tripped(const Eigen::MatrixXd& x, int t, const GeneratorOptions& options);

enum class MissingKind { mcar, mar, mnar };

// 1 marks a missing cell. For mar / mnar the intercept is solved so that the
// mean missingness probability over `z` equals `rate`.
Eigen::MatrixXi missing_mask(MissingKind kind, double rate, const Eigen::MatrixXd& z, double beta,
                             Rng& rng);
double solve_missing_intercept(const Eigen::MatrixXd& z, double beta, double rate);
Eigen::MatrixXd linear_interpolate(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask);
Eigen::MatrixXd apply_scale_blend(const Eigen::MatrixXd& x, double alpha);

// Confounder removal, observational noise, missingness and scale blending,
// in that order.
Eigen::MatrixXd apply_post_transforms(Eigen::MatrixXd x, const ScmSpec& scm,
                                      const CompositeConfig& violation, Rng& rng,
                                      const GeneratorOptions& options);

SampleRecord generate_sample(const Regime& regime, const CompositeConfig& violation,
                             std::uint64_t seed, const GeneratorOptions& options);

struct PlanItem {
  Regime regime;
  CompositeConfig violation;
  int count = 0;
};

std::uint64_t sample_seed(std::uint64_t master, const CompositeConfig& violation,
                          const Regime& regime, int index);

// Samples of all items in plan order; deterministic for any `jobs`.
std::vector<SampleRecord> generate_batch(const std::vector<PlanItem>& plan, std::uint64_t master_seed,
                                         const GeneratorOptions& options, int jobs = 1);

}  // namespace tcda
