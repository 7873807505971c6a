#include "tcda/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "tcda/error.hpp"
#include "tcda/harness.hpp"
#include "tcda/metrics.hpp"

namespace tcda {
namespace {

void check_same_shape(const std::vector<ScoreGraph>& graphs) {
  if (graphs.empty()) throw Error(ErrorCode::invalid_argument, "no graphs to combine");
  for (const auto& g : graphs) {
    if (g.lagged.dims() != graphs.front().lagged.dims()) {
      throw Error(ErrorCode::shape, "graphs to combine have different lagged shapes");
    }
    if (g.inst.has_value() != graphs.front().inst.has_value()) {
      throw Error(ErrorCode::shape, "only some graphs carry instantaneous scores");
    }
  }
}

std::vector<ScoreGraph> prepare(const std::vector<ScoreGraph>& graphs, Normalization n) {
  std::vector<ScoreGraph> out = common_shape(graphs);
  if (n == Normalization::minmax) {
    for (auto& g : out) g = normalize_minmax(g);
  }
  return out;
}

}  // namespace

Tensor3 normalize_minmax(const Tensor3& t) {
  Tensor3 out = t;
  auto v = out.values();
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, span = *hi - *lo;
  for (double& x : v) x = span > 0.0 ? (x - a) / span : 0.0;
  return out;
}

Eigen::MatrixXd normalize_minmax(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return m;
  const double lo = m.minCoeff(), span = m.maxCoeff() - lo;
  if (!(span > 0.0)) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  return (m.array() - lo) / span;
}

ScoreGraph normalize_minmax(const ScoreGraph& g) {
  ScoreGraph out = g;
  out.lagged = normalize_minmax(g.lagged);
  if (g.inst) out.inst = normalize_minmax(*g.inst);
  return out;
}

std::vector<ScoreGraph> common_shape(const std::vector<ScoreGraph>& graphs) {
  if (graphs.empty()) throw Error(ErrorCode::invalid_argument, "no graphs to combine");
  int lags = 0;
  bool all_inst = true;
  for (const auto& g : graphs) {
    if (g.num_vars() != graphs.front().num_vars()) throw Error(ErrorCode::shape, "variable counts differ");
    lags = std::max(lags, g.model_lags());
    all_inst = all_inst && g.inst.has_value();
  }
  std::vector<ScoreGraph> out = graphs;
  for (auto& g : out) {
    g.lagged = pad_lags(g.lagged, lags);
    if (!all_inst) g.inst.reset();
  }
  return out;
}

ScoreGraph ensemble_average(const std::vector<ScoreGraph>& graphs) {
  check_same_shape(graphs);
  ScoreGraph out;
  const auto& d = graphs.front().lagged.dims();
  out.lagged = Tensor3(d[0], d[1], d[2]);
  auto acc = out.lagged.values();
  for (const auto& g : graphs) {
    const auto v = g.lagged.values();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
  }
  const double m = static_cast<double>(graphs.size());
  for (double& x : acc) x /= m;
  if (graphs.front().inst) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(graphs.front().inst->rows(), graphs.front().inst->cols());
    for (const auto& g : graphs) sum += *g.inst;
    out.inst = sum / m;
  }
  out.method = "average";
  out.hp = "default";
  out.sample = graphs.front().sample;
  return out;
}

const char* normalization_name(Normalization n) { return n == Normalization::minmax ? "minmax" : "none"; }

Normalization parse_normalization(const std::string& s) {
  if (s == "minmax") return Normalization::minmax;
  if (s == "none") return Normalization::none;
  throw Error(ErrorCode::config, "unknown normalization: " + s);
}

LinearEnsembleModel train_linear(const std::vector<TrainingExample>& examples, double lambda,
                                 Normalization normalization, std::vector<std::string> methods) {
  if (examples.empty()) throw Error(ErrorCode::invalid_argument, "empty training set");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::invalid_argument, "lambda must be >= 0");
  const std::size_t m = examples.front().graphs.size();
  if (m == 0) throw Error(ErrorCode::invalid_argument, "no input methods");
  const Eigen::Index p = static_cast<Eigen::Index>(m) + 1;

  // Accumulate X^T X and X^T y directly; the design never materializes.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd row(p);
  auto add = [&](double label) {
    gram.noalias() += row * row.transpose();
    rhs += label * row;
  };
  for (const auto& ex : examples) {
    if (ex.graphs.size() != m) throw Error(ErrorCode::shape, "training examples differ in method count");
    const std::vector<ScoreGraph> gs = prepare(ex.graphs, normalization);
    const int lags = std::max(gs.front().model_lags(), static_cast<int>(ex.truth.lwcg.dim(2)));
    const Tensor3 truth = pad_lags(ex.truth.lwcg, lags);
    std::vector<Tensor3> feats;
    for (const auto& g : gs) feats.push_back(pad_lags(g.lagged, lags));
    const auto labels = truth.values();
    for (std::size_t k = 0; k < labels.size(); ++k) {
      for (std::size_t j = 0; j < m; ++j) row(static_cast<Eigen::Index>(j)) = feats[j].values()[k];
      row(p - 1) = 1.0;
      add(labels[k] != 0.0 ? 1.0 : 0.0);
    }
    if (gs.front().inst) {
      const Eigen::Index d = ex.truth.inst.rows();
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index c = 0; c < d; ++c) {
          if (i == c) continue;
          for (std::size_t j = 0; j < m; ++j) row(static_cast<Eigen::Index>(j)) = (*gs[j].inst)(i, c);
          row(p - 1) = 1.0;
          add(ex.truth.inst(i, c) != 0.0 ? 1.0 : 0.0);
        }
      }
    }
  }
  for (Eigen::Index j = 0; j + 1 < p; ++j) gram(j, j) += lambda;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < p) {
    throw Error(ErrorCode::numeric, "singular normal equations; increase lambda");
  }
  const Eigen::VectorXd w = lu.solve(rhs);

  LinearEnsembleModel model;
  model.methods = std::move(methods);
  if (model.methods.empty()) {
    for (const auto& g : examples.front().graphs) model.methods.push_back(g.method + "/" + g.hp);
  }
  model.weights.assign(w.data(), w.data() + m);
  model.bias = w(p - 1);
  model.normalization = normalization;
  model.lambda = lambda;
  for (double x : model.weights) {
    if (!std::isfinite(x)) throw Error(ErrorCode::numeric, "non-finite ensemble weight");
  }
  return model;
}

ScoreGraph apply_linear(const LinearEnsembleModel& model, const std::vector<ScoreGraph>& graphs) {
  if (graphs.size() != model.weights.size()) {
    throw Error(ErrorCode::shape, "model expects " + std::to_string(model.weights.size()) + " inputs, got " +
                                      std::to_string(graphs.size()));
  }
  const std::vector<ScoreGraph> gs = prepare(graphs, model.normalization);
  ScoreGraph out;
  const auto& d = gs.front().lagged.dims();
  out.lagged = Tensor3(d[0], d[1], d[2], model.bias);
  auto acc = out.lagged.values();
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const auto v = gs[j].lagged.values();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += model.weights[j] * v[k];
  }
  if (gs.front().inst) {
    const auto rows = gs.front().inst->rows();
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(rows, rows, model.bias);
    for (std::size_t j = 0; j < gs.size(); ++j) s += model.weights[j] * *gs[j].inst;
    out.inst = s;
  }
  out.method = "linear";
  out.hp = "default";
  out.sample = graphs.front().sample;
  return out;
}

std::string pareto_choice(const RobustnessTable& table, const std::string& violation) {
  const auto it = table.find(violation);
  if (it == table.end() || it->second.empty()) {
    throw Error(ErrorCode::invalid_argument, "no robustness entries for violation " + violation);
  }
  const std::string* best = nullptr;
  double best_v = 0.0;
  for (const auto& [label, v] : it->second) {
    if (std::isnan(v)) continue;
    if (best == nullptr || v < best_v) {
      best = &label;
      best_v = v;
    }
  }
  if (best == nullptr) throw Error(ErrorCode::undefined, "no measured robustness for " + violation);
  return *best;
}

ScoreGraph pareto_oracle(const RobustnessTable& table, const std::string& violation,
                         const std::vector<ScoreGraph>& graphs) {
  const std::string label = pareto_choice(table, violation);
  for (const auto& g : graphs) {
    if (g.method == label || g.method + "/" + g.hp == label) return g;
  }
  throw Error(ErrorCode::invalid_argument, "no graph for the oracle choice " + label);
}

}  // namespace tcda
