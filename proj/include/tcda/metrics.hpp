#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcda/tensor.hpp"

namespace tcda {

enum class GraphKind { lwcg, inst, lsg };
enum class Metric { shd_min_norm, auroc, f1_max, acc_max };

const char* graph_name(GraphKind g);
const char* metric_name(Metric m);
GraphKind parse_graph(const std::string& s);
Metric parse_metric(const std::string& s);
const std::vector<GraphKind>& all_graphs();
const std::vector<Metric>& all_metrics();
bool lower_is_better(Metric m);

// All metrics sweep the thresholds {distinct scores} u {+inf}; a slot is
// predicted as an edge iff its score is strictly greater than the threshold.
// Truth entries are nonzero for edges. Functions throw ErrorCode::undefined
// when the metric does not exist for the given truth.

// min over thresholds of (false positives + false negatives) / #true edges.
double shd_min_norm(std::span<const double> scores, std::span<const double> truth);
// P(score of a random edge > score of a random non-edge), ties count 1/2.
double auroc(std::span<const double> scores, std::span<const double> truth);
double f1_max(std::span<const double> scores, std::span<const double> truth);
double acc_max(std::span<const double> scores, std::span<const double> truth);

double compute_metric(Metric m, std::span<const double> scores, std::span<const double> truth);

// Entrywise maximum over the lag axis.
Eigen::MatrixXd lsg_from_scores(const Tensor3& lagged);

// Flattened slots of a graph. INST drops the diagonal.
std::vector<double> flatten(const Tensor3& t);
std::vector<double> flatten(const Eigen::MatrixXd& m, bool skip_diagonal);

}  // namespace tcda
