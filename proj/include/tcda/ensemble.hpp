#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcda/discovery.hpp"
#include "tcda/scm.hpp"

namespace tcda {

// Affine map of all entries onto [0, 1]; a constant input becomes all zeros.
Tensor3 normalize_minmax(const Tensor3& t);
Eigen::MatrixXd normalize_minmax(const Eigen::MatrixXd& m);
// Lagged and instantaneous parts are normalized separately.
ScoreGraph normalize_minmax(const ScoreGraph& g);

// Zero-pads every graph to the largest lag count among them. The
// instantaneous part is kept only when every graph has one.
std::vector<ScoreGraph> common_shape(const std::vector<ScoreGraph>& graphs);

// Entrywise mean. Inputs must already share one shape.
ScoreGraph ensemble_average(const std::vector<ScoreGraph>& graphs);

enum class Normalization { none, minmax };
const char* normalization_name(Normalization n);
Normalization parse_normalization(const std::string& s);

struct LinearEnsembleModel {
  std::vector<std::string> methods;  // "method/hp" labels of the inputs, in order
  std::vector<double> weights;       // one per method, shared by all edge slots
  double bias = 0.0;
  Normalization normalization = Normalization::minmax;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string solver = "normal_equations";
};

struct TrainingExample {
  std::vector<ScoreGraph> graphs;  // one per method, same order as the model
  GroundTruth truth;
};

// Ridge regression of the binary edge labels on the per-slot normalized
// scores plus a bias. The bias is not penalized.
LinearEnsembleModel train_linear(const std::vector<TrainingExample>& examples, double lambda,
                                 Normalization normalization = Normalization::minmax,
                                 std::vector<std::string> methods = {});

ScoreGraph apply_linear(const LinearEnsembleModel& model, const std::vector<ScoreGraph>& graphs);

// violation -> method label -> robustness (lower is better).
using RobustnessTable = std::map<std::string, std::map<std::string, double>>;

// Label of the best method for the violation; ties go to the smallest label.
std::string pareto_choice(const RobustnessTable& table, const std::string& violation);
// Returns the graph whose `method` matches the chosen label.
ScoreGraph pareto_oracle(const RobustnessTable& table, const std::string& violation,
                         const std::vector<ScoreGraph>& graphs);

}  // namespace tcda
