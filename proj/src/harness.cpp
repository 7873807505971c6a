#include "tcda/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <tuple>

#include "tcda/error.hpp"
#include "tcda/io.hpp"
#include "tcda/parallel.hpp"

namespace tcda {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using CellKey = std::tuple<std::string, std::string, std::string, int, std::string, GraphKind, Metric>;

struct Cell {
  double sum = 0.0;
  int count = 0;
  int failures = 0;
};

struct Outcome {
  bool failed = false;
  std::map<std::pair<GraphKind, Metric>, std::optional<double>> values;
};

bool wants(const std::vector<GraphKind>& graphs, GraphKind g) {
  return std::find(graphs.begin(), graphs.end(), g) != graphs.end();
}

std::optional<double> metric_or_skip(Metric m, std::span<const double> s, std::span<const double> t) {
  try {
    return compute_metric(m, s, t);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::undefined) return std::nullopt;
    throw;
  }
}

}  // namespace

std::string sample_id(const std::string& violation, int level, const std::string& regime_id, int index) {
  return violation + "_L" + std::to_string(level) + "__" + regime_id + "__" + std::to_string(index);
}

EvalSample to_eval_sample(const SampleRecord& record) {
  EvalSample s;
  s.violation = record.violation.id();
  s.level = record.violation.level();
  s.regime = record.regime;
  s.index = record.index;
  s.x = record.x;
  s.truth = record.truth;
  s.id = sample_id(s.violation, s.level, s.regime.id(), s.index);
  return s;
}

Tensor3 pad_lags(const Tensor3& t, int lags) {
  if (static_cast<int>(t.dim(2)) > lags) throw Error(ErrorCode::shape, "cannot pad to fewer lags");
  Tensor3 out(t.dim(0), t.dim(1), static_cast<std::size_t>(lags));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) {
      for (std::size_t l = 0; l < t.dim(2); ++l) out(i, j, l) = t(i, j, l);
    }
  }
  return out;
}

AlignedLagged align_lags(const Tensor3& scores, const Tensor3& truth) {
  if (scores.dim(0) != truth.dim(0) || scores.dim(1) != truth.dim(1)) {
    throw Error(ErrorCode::shape, "score and truth variable counts differ");
  }
  const int lags = static_cast<int>(std::max(scores.dim(2), truth.dim(2)));
  return {pad_lags(scores, lags), pad_lags(truth, lags)};
}

Scorer baseline_scorer(const MethodSpec& spec) {
  Scorer s;
  s.method = spec.method;
  s.hp = spec.hp;
  s.may_have_inst = false;
  s.score = [spec](const EvalSample& sample) {
    ScoreGraph g = run_baseline(spec, sample.x, sample.true_lags());
    g.sample = sample.id;
    return g;
  };
  return s;
}

Scorer external_scorer(const std::string& dir, const std::string& method, const std::string& hp) {
  Scorer s;
  s.method = method;
  s.hp = hp;
  s.score = [dir, method, hp](const EvalSample& sample) {
    const std::filesystem::path stem = std::filesystem::path(dir) / method / hp / sample.id;
    const std::string lagged = stem.string() + ".lagged.tcda";
    if (!std::filesystem::exists(lagged)) throw Error(ErrorCode::io, "missing prediction " + lagged);
    // External methods choose their own L_model; only the lag count is free.
    const int lags = static_cast<int>(to_tensor3(read_tensor(lagged)).dim(2));
    ScoreGraph g = ingest_external(stem.string(), sample.x.rows(), lags);
    g.method = method;
    g.hp = hp;
    g.sample = sample.id;
    return g;
  };
  return s;
}

std::map<std::pair<GraphKind, Metric>, std::optional<double>> score_sample(
    const ScoreGraph& g, const GroundTruth& truth, const EvalOptions& options) {
  const int d = static_cast<int>(truth.lwcg.dim(0));
  validate_scores(g, d, g.model_lags());
  std::map<std::pair<GraphKind, Metric>, std::optional<double>> out;
  auto fill = [&](GraphKind kind, const std::vector<double>& s, const std::vector<double>& t) {
    for (Metric m : options.metrics) out[{kind, m}] = metric_or_skip(m, s, t);
  };
  if (wants(options.graphs, GraphKind::lwcg)) {
    const AlignedLagged a = align_lags(g.lagged, truth.lwcg);
    fill(GraphKind::lwcg, flatten(a.scores), flatten(a.truth));
  }
  if (wants(options.graphs, GraphKind::inst) && g.inst) {
    fill(GraphKind::inst, flatten(*g.inst, true), flatten(truth.inst, true));
  }
  if (wants(options.graphs, GraphKind::lsg)) {
    fill(GraphKind::lsg, flatten(lsg_from_scores(g.lagged), false), flatten(truth.lsg, false));
  }
  return out;
}

std::vector<ResultRow> run_protocol(const std::vector<EvalSample>& samples,
                                    const std::vector<Scorer>& scorers, const EvalOptions& options) {
  const std::size_t n = samples.size();
  std::vector<Outcome> outcomes(n * scorers.size());
  parallel_for(outcomes.size(), options.jobs, [&](std::size_t task) {
    const Scorer& scorer = scorers[task / n];
    const EvalSample& sample = samples[task % n];
    Outcome& o = outcomes[task];
    try {
      o.values = score_sample(scorer.score(sample), sample.truth, options);
    } catch (const Error&) {
      o.failed = true;
    }
  });

  std::map<CellKey, Cell> cells;
  for (std::size_t m = 0; m < scorers.size(); ++m) {
    const Scorer& scorer = scorers[m];
    for (std::size_t k = 0; k < n; ++k) {
      const EvalSample& s = samples[k];
      const Outcome& o = outcomes[m * n + k];
      auto key = [&](GraphKind g, Metric met) {
        return CellKey{scorer.method, scorer.hp, s.violation, s.level, s.regime.id(), g, met};
      };
      if (o.failed) {
        for (GraphKind g : options.graphs) {
          if (g == GraphKind::inst && !scorer.may_have_inst) continue;
          for (Metric met : options.metrics) cells[key(g, met)].failures += 1;
        }
        continue;
      }
      for (const auto& [gm, v] : o.values) {
        Cell& c = cells[key(gm.first, gm.second)];
        if (v) {
          c.sum += *v;
          c.count += 1;
        } else {
          c.failures += 1;
        }
      }
    }
  }

  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (const auto& [k, c] : cells) {
    ResultRow r;
    std::tie(r.method, r.hp, r.violation, r.level, r.regime_id, r.graph, r.metric) = k;
    r.count = c.count;
    r.failures = c.failures;
    r.value = c.count > 0 ? c.sum / c.count : kNaN;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ProfileEntry> aggregate_robustness(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, GraphKind, Metric>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.hp, r.violation, r.graph, r.metric}].push_back(r.value);
  std::vector<ProfileEntry> out;
  for (auto& [k, values] : groups) {
    ProfileEntry p;
    std::tie(p.method, p.hp, p.violation, p.graph, p.metric) = k;
    double sum = 0.0;
    int n = 0;
    for (double v : values) {
      if (std::isnan(v)) {
        p.partial = true;
        continue;
      }
      sum += v;
      ++n;
    }
    p.cells = n;
    p.mean = n > 0 ? sum / n : kNaN;
    double ss = 0.0;
    for (double v : values) {
      if (!std::isnan(v)) ss += (v - p.mean) * (v - p.mean);
    }
    p.stddev = n > 0 ? std::sqrt(ss / n) : kNaN;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

// Lower is better after this transform, for every metric.
double badness(Metric m, double v) { return lower_is_better(m) ? v : -v; }

}  // namespace

std::map<std::string, std::string> select_best_hp(const std::vector<ProfileEntry>& profiles,
                                                  GraphKind graph, Metric metric) {
  std::map<std::string, std::set<std::string>> violations;
  std::map<std::pair<std::string, std::string>, std::vector<double>> per_hp;
  for (const auto& p : profiles) {
    if (p.graph != graph || p.metric != metric) continue;
    violations[p.method].insert(p.violation);
    auto& v = per_hp[{p.method, p.hp}];
    if (!std::isnan(p.mean)) v.push_back(badness(metric, p.mean));
  }
  std::map<std::string, std::tuple<bool, double, std::string>> best;
  for (const auto& [mh, values] : per_hp) {
    const auto& [method, hp] = mh;
    const bool incomplete = values.size() < violations[method].size() || values.empty();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean = values.empty() ? 0.0 : mean / static_cast<double>(values.size());
    std::tuple<bool, double, std::string> cand{incomplete, mean, hp};
    auto it = best.find(method);
    if (it == best.end() || cand < it->second) best[method] = cand;
  }
  std::map<std::string, std::string> out;
  for (const auto& [method, t] : best) out[method] = std::get<2>(t);
  return out;
}

std::map<std::pair<std::string, std::string>, std::string> select_best_hp_per_violation(
    const std::vector<ProfileEntry>& profiles, GraphKind graph, Metric metric) {
  std::map<std::pair<std::string, std::string>, std::tuple<bool, double, std::string>> best;
  for (const auto& p : profiles) {
    if (p.graph != graph || p.metric != metric) continue;
    const bool missing = std::isnan(p.mean);
    std::tuple<bool, double, std::string> cand{missing, missing ? 0.0 : badness(metric, p.mean), p.hp};
    auto key = std::make_pair(p.method, p.violation);
    auto it = best.find(key);
    if (it == best.end() || cand < it->second) best[key] = cand;
  }
  std::map<std::pair<std::string, std::string>, std::string> out;
  for (const auto& [k, t] : best) out[k] = std::get<2>(t);
  return out;
}

std::vector<WorstCase> worst_case(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, GraphKind, Metric>;
  std::map<Key, double> worst;
  for (const auto& r : rows) {
    if (std::isnan(r.value)) continue;
    const Key k{r.method, r.hp, r.violation, r.graph, r.metric};
    auto it = worst.find(k);
    if (it == worst.end()) {
      worst[k] = r.value;
    } else if (badness(r.metric, r.value) > badness(r.metric, it->second)) {
      it->second = r.value;
    }
  }
  std::vector<WorstCase> out;
  for (const auto& [k, v] : worst) {
    WorstCase w;
    std::tie(w.method, w.hp, w.violation, w.graph, w.metric) = k;
    w.value = v;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace tcda
