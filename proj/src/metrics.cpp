#include "tcda/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "tcda/error.hpp"

namespace tcda {
namespace {

struct Confusion {
  double tp, fp, fn, tn;
};

void check_sizes(std::span<const double> scores, std::span<const double> truth) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::shape, "score and truth sizes differ");
  if (scores.empty()) throw Error(ErrorCode::undefined, "no slots to score");
}

// Calls visit(confusion) for every threshold state, starting from "no edge
// predicted" and admitting one group of tied scores at a time, highest first.
// The lowest group is never admitted: no threshold lies below it.
template <class Visit>
void sweep(std::span<const double> scores, std::span<const double> truth, Visit&& visit) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0.0;
  for (double t : truth) pos += t != 0.0 ? 1.0 : 0.0;
  const double neg = static_cast<double>(n) - pos;
  Confusion c{0.0, 0.0, pos, neg};
  visit(c);
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    if (end == n) break;
    for (std::size_t m = k; m < end; ++m) {
      if (truth[order[m]] != 0.0) {
        c.tp += 1.0;
        c.fn -= 1.0;
      } else {
        c.fp += 1.0;
        c.tn -= 1.0;
      }
    }
    visit(c);
    k = end;
  }
}

std::size_t count_edges(std::span<const double> truth) {
  return static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](double t) { return t != 0.0; }));
}

}  // namespace

const char* graph_name(GraphKind g) {
  switch (g) {
    case GraphKind::lwcg: return "LWCG";
    case GraphKind::inst: return "INST";
    case GraphKind::lsg: return "LSG";
  }
  return "?";
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::shd_min_norm: return "shd_min_norm";
    case Metric::auroc: return "auroc";
    case Metric::f1_max: return "f1_max";
    case Metric::acc_max: return "acc_max";
  }
  return "?";
}

GraphKind parse_graph(const std::string& s) {
  for (GraphKind g : all_graphs()) {
    std::string name = graph_name(g);
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (s == name || s == lower) return g;
  }
  throw Error(ErrorCode::config, "unknown graph kind: " + s);
}

Metric parse_metric(const std::string& s) {
  for (Metric m : all_metrics()) {
    if (s == metric_name(m)) return m;
  }
  throw Error(ErrorCode::config, "unknown metric: " + s);
}

const std::vector<GraphKind>& all_graphs() {
  static const std::vector<GraphKind> g = {GraphKind::lwcg, GraphKind::inst, GraphKind::lsg};
  return g;
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> m = {Metric::shd_min_norm, Metric::auroc, Metric::f1_max,
                                        Metric::acc_max};
  return m;
}

bool lower_is_better(Metric m) { return m == Metric::shd_min_norm; }

double shd_min_norm(std::span<const double> scores, std::span<const double> truth) {
  check_sizes(scores, truth);
  const std::size_t pos = count_edges(truth);
  if (pos == 0) throw Error(ErrorCode::undefined, "min-normalized SHD needs at least one true edge");
  double best = static_cast<double>(scores.size()) + 1.0;
  sweep(scores, truth, [&](const Confusion& c) { best = std::min(best, c.fp + c.fn); });
  return best / static_cast<double>(pos);
}

double auroc(std::span<const double> scores, std::span<const double> truth) {
  check_sizes(scores, truth);
  const std::size_t n = scores.size();
  const std::size_t pos = count_edges(truth);
  if (pos == 0 || pos == n) throw Error(ErrorCode::undefined, "AUROC needs both edges and non-edges");
  // Mann-Whitney U from average ranks.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    const double avg_rank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t m = k; m < end; ++m) {
      if (truth[order[m]] != 0.0) rank_sum += avg_rank;
    }
    k = end;
  }
  const double p = static_cast<double>(pos);
  const double q = static_cast<double>(n - pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double f1_max(std::span<const double> scores, std::span<const double> truth) {
  check_sizes(scores, truth);
  if (count_edges(truth) == 0) throw Error(ErrorCode::undefined, "F1 needs at least one true edge");
  double best = 0.0;
  sweep(scores, truth, [&](const Confusion& c) {
    const double denom = 2.0 * c.tp + c.fp + c.fn;
    if (denom > 0.0) best = std::max(best, 2.0 * c.tp / denom);
  });
  return best;
}

double acc_max(std::span<const double> scores, std::span<const double> truth) {
  check_sizes(scores, truth);
  double best = 0.0;
  const double n = static_cast<double>(scores.size());
  sweep(scores, truth, [&](const Confusion& c) { best = std::max(best, (c.tp + c.tn) / n); });
  return best;
}

double compute_metric(Metric m, std::span<const double> scores, std::span<const double> truth) {
  switch (m) {
    case Metric::shd_min_norm: return shd_min_norm(scores, truth);
    case Metric::auroc: return auroc(scores, truth);
    case Metric::f1_max: return f1_max(scores, truth);
    case Metric::acc_max: return acc_max(scores, truth);
  }
  throw Error(ErrorCode::invalid_argument, "unknown metric");
}

Eigen::MatrixXd lsg_from_scores(const Tensor3& lagged) {
  const auto d = static_cast<Eigen::Index>(lagged.dim(0));
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(lagged.dim(1)));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      double m = lagged(i, j, 0);
      for (std::size_t l = 1; l < lagged.dim(2); ++l) m = std::max(m, lagged(i, j, l));
      out(i, j) = m;
    }
  }
  return out;
}

std::vector<double> flatten(const Tensor3& t) { return {t.values().begin(), t.values().end()}; }

std::vector<double> flatten(const Eigen::MatrixXd& m, bool skip_diagonal) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (skip_diagonal && i == j) continue;
      out.push_back(m(i, j));
    }
  }
  return out;
}

}  // namespace tcda
