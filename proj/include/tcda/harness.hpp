#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tcda/discovery.hpp"
#include "tcda/generator.hpp"
#include "tcda/metrics.hpp"
#include "tcda/scm.hpp"

namespace tcda {

struct EvalSample {
  std::string violation;  // composite id, "none" for the baseline
  int level = 0;
  Regime regime;
  int index = 0;
  Eigen::MatrixXd x;
  GroundTruth truth;
  std::string id;

  int true_lags() const { return static_cast<int>(truth.lwcg.dim(2)); }
};

// "<violation>_L<level>__<regime id>__<index>"
std::string sample_id(const std::string& violation, int level, const std::string& regime_id, int index);
EvalSample to_eval_sample(const SampleRecord& record);

// Zero-pads the shorter lag axis so both tensors cover max(L_model, L) lags.
Tensor3 pad_lags(const Tensor3& t, int lags);
struct AlignedLagged {
  Tensor3 scores;
  Tensor3 truth;
};
AlignedLagged align_lags(const Tensor3& scores, const Tensor3& truth);

// A named score producer. Baselines, external predictions and ensembles are
// all plugged into the protocol through this.
struct Scorer {
  std::string method;
  std::string hp;
  // Native scorers never produce instantaneous scores.
  bool may_have_inst = true;
  std::function<ScoreGraph(const EvalSample&)> score;
};

Scorer baseline_scorer(const MethodSpec& spec);
// Reads <dir>/<method>/<hp>/<sample id>.lagged.tcda (+ .inst.tcda).
Scorer external_scorer(const std::string& dir, const std::string& method, const std::string& hp);

struct EvalOptions {
  std::vector<GraphKind> graphs = all_graphs();
  std::vector<Metric> metrics = all_metrics();
  int jobs = 1;
};

struct ResultRow {
  std::string method;
  std::string hp;
  std::string violation;
  int level = 0;
  std::string regime_id;
  GraphKind graph = GraphKind::lwcg;
  Metric metric = Metric::shd_min_norm;
  double value = 0.0;  // mean over successful samples, NaN when count is 0
  int count = 0;
  int failures = 0;  // method errors plus samples where the metric is undefined
};

// Per-sample metric values, nullopt where undefined. Throws if the scorer's
// output is malformed.
std::map<std::pair<GraphKind, Metric>, std::optional<double>> score_sample(
    const ScoreGraph& g, const GroundTruth& truth, const EvalOptions& options);

// Rows sorted by key; identical for any number of jobs.
std::vector<ResultRow> run_protocol(const std::vector<EvalSample>& samples,
                                    const std::vector<Scorer>& scorers, const EvalOptions& options);

struct ProfileEntry {
  std::string method;
  std::string hp;
  std::string violation;
  GraphKind graph = GraphKind::lwcg;
  Metric metric = Metric::shd_min_norm;
  double mean = 0.0;  // unweighted over cells with a value
  double stddev = 0.0;  // population std over the same cells
  int cells = 0;
  bool partial = false;  // some cell had no successful sample
};

// One entry per (method, hp, violation, graph, metric), over levels x regimes.
std::vector<ProfileEntry> aggregate_robustness(const std::vector<ResultRow>& rows);

// method -> hp minimizing the mean over violations of the profile value for
// (graph, metric). Ties go to the lexicographically smallest hp. An hp missing
// a value for some violation ranks behind every complete hp.
std::map<std::string, std::string> select_best_hp(const std::vector<ProfileEntry>& profiles,
                                                  GraphKind graph = GraphKind::lwcg,
                                                  Metric metric = Metric::shd_min_norm);
// (method, violation) -> hp, choosing separately for every violation.
std::map<std::pair<std::string, std::string>, std::string> select_best_hp_per_violation(
    const std::vector<ProfileEntry>& profiles, GraphKind graph = GraphKind::lwcg,
    Metric metric = Metric::shd_min_norm);

struct WorstCase {
  std::string method;
  std::string hp;
  std::string violation;
  GraphKind graph;
  Metric metric;
  double value;  // max cell for SHD, min cell for the higher-is-better metrics
};
std::vector<WorstCase> worst_case(const std::vector<ResultRow>& rows);

}  // namespace tcda
