#include <algorithm>
#include <cmath>
#include <set>
#include <cstring>
#include <tuple>

#include "doctest.h"
#include "tcda/error.hpp"
#include "tcda/harness.hpp"

using namespace tcda;

namespace {

EvalSample toy_sample(const std::string& violation, int level, const Regime& regime, int index,
                      std::uint64_t seed) {
  const auto cfg = violation == "none" ? single(unviolated()) : single(resolve(violation, level));
  return to_eval_sample(generate_sample(regime, cfg, seed, {}));
}

// Scorer returning the truth itself, or throwing on chosen indices.
Scorer oracle_scorer(std::set<int> fail_on = {}) {
  return {"oracle", "default", true, [fail_on](const EvalSample& s) {
            if (fail_on.count(s.index)) throw Error(ErrorCode::numeric, "planned failure");
            ScoreGraph g;
            g.lagged = s.truth.lwcg;
            g.inst = s.truth.inst;
            g.method = "oracle";
            return g;
          }};
}

ResultRow row(const std::string& method, const std::string& hp, const std::string& violation, int level,
              const std::string& regime, double value, int count = 1, int failures = 0) {
  ResultRow r;
  r.method = method;
  r.hp = hp;
  r.violation = violation;
  r.level = level;
  r.regime_id = regime;
  r.value = value;
  r.count = count;
  r.failures = failures;
  return r;
}

ProfileEntry profile(const std::string& method, const std::string& hp, const std::string& violation,
                     double mean) {
  ProfileEntry p;
  p.method = method;
  p.hp = hp;
  p.violation = violation;
  p.mean = mean;
  p.cells = 1;
  return p;
}

}  // namespace

TEST_CASE("sample ids") {
  CHECK(sample_id("obs_add", 3, "D5L3-T250-P0.075-I0", 7) == "obs_add_L3__D5L3-T250-P0.075-I0__7");
}

TEST_CASE("lag alignment") {
  Tensor3 truth(2, 2, 3);
  truth(0, 1, 2) = 1.0;  // true edge at lag 3
  Tensor3 scores(2, 2, 3, 0.2);
  AlignedLagged same = align_lags(scores, truth);
  CHECK(same.scores == scores);
  CHECK(same.truth == truth);

  // Longer model: padded truth lags carry no edges; zero scores there change nothing.
  Tensor3 longer(2, 2, 5);
  for (int l = 0; l < 3; ++l) longer(0, 1, l) = truth(0, 1, l);
  const AlignedLagged wide = align_lags(longer, truth);
  CHECK(wide.truth.dim(2) == 5);
  CHECK(shd_min_norm(flatten(wide.scores), flatten(wide.truth)) == 0.0);

  // Shorter model: the lag-3 edge becomes a guaranteed miss.
  Tensor3 shorter(2, 2, 1, 0.0);
  shorter(0, 1, 0) = 0.9;
  const AlignedLagged narrow = align_lags(shorter, truth);
  CHECK(narrow.scores.dim(2) == 3);
  CHECK(narrow.scores(0, 1, 2) == 0.0);
  CHECK(shd_min_norm(flatten(narrow.scores), flatten(narrow.truth)) == 1.0);
}

TEST_CASE("plan arithmetic and failure accounting") {
  std::vector<EvalSample> samples;
  const auto regimes = default_regimes();
  // 16 regimes x 5 levels x 2 samples; the arithmetic scales to 100 samples per cell.
  for (const auto& r : regimes) {
    Regime shortr = r;
    shortr.length = 60;
    for (int level = 1; level <= 5; ++level) {
      for (int k = 0; k < 2; ++k) {
        EvalSample s = toy_sample("obs_add", level, shortr, k, 1000 + samples.size());
        s.regime = r;
        s.index = k;
        s.id = sample_id("obs_add", level, r.id(), k);
        samples.push_back(std::move(s));
      }
    }
  }
  EvalOptions opt;
  opt.graphs = {GraphKind::lwcg};
  opt.metrics = {Metric::shd_min_norm, Metric::auroc};
  const auto rows = run_protocol(samples, {oracle_scorer({1})}, opt);
  CHECK(rows.size() == 80 * 2);
  int total = 0;
  for (const auto& r : rows) {
    CHECK(r.count + r.failures == 2);
    total += r.count + r.failures;
    if (r.count > 0 && r.metric == Metric::shd_min_norm) CHECK(r.value == 0.0);
  }
  CHECK(total == 160 * 2);
  CHECK(std::is_sorted(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.hp, a.violation, a.level, a.regime_id, a.graph, a.metric) <
           std::tie(b.method, b.hp, b.violation, b.level, b.regime_id, b.graph, b.metric);
  }));

  const auto again = run_protocol(samples, {oracle_scorer({1})}, {opt.graphs, opt.metrics, 3});
  REQUIRE(again.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(again[k].count == rows[k].count);
    CHECK(std::memcmp(&again[k].value, &rows[k].value, sizeof(double)) == 0);
  }
}

TEST_CASE("a failing method leaves NaN cells") {
  const Regime r{5, 3, 80, 0.15, 0.1};
  std::vector<EvalSample> samples{toy_sample("none", 0, r, 0, 1)};
  samples[0].index = 0;
  const auto rows = run_protocol(samples, {oracle_scorer({0})}, {});
  REQUIRE_FALSE(rows.empty());
  for (const auto& x : rows) {
    CHECK(x.count == 0);
    CHECK(x.failures == 1);
    CHECK(std::isnan(x.value));
  }
}

TEST_CASE("native baselines skip the instantaneous graph") {
  const Regime r{5, 3, 120, 0.15, 0.1};
  std::vector<EvalSample> samples{toy_sample("none", 0, r, 0, 2)};
  const auto rows = run_protocol(samples, {baseline_scorer(find_baseline(kCrossCorrelation, "lag+0"))}, {});
  CHECK(std::none_of(rows.begin(), rows.end(), [](const ResultRow& x) { return x.graph == GraphKind::inst; }));
  CHECK(std::any_of(rows.begin(), rows.end(), [](const ResultRow& x) { return x.graph == GraphKind::lsg; }));
}

TEST_CASE("robustness aggregation") {
  std::vector<ResultRow> rows{row("m", "h", "v", 1, "r1", 0.2), row("m", "h", "v", 2, "r1", 0.4)};
  auto p = aggregate_robustness(rows);
  REQUIRE(p.size() == 1);
  CHECK(p[0].mean == doctest::Approx(0.3));
  CHECK(p[0].stddev == doctest::Approx(0.1));
  CHECK(p[0].cells == 2);
  CHECK_FALSE(p[0].partial);

  std::reverse(rows.begin(), rows.end());
  CHECK(aggregate_robustness(rows)[0].mean == p[0].mean);

  rows.push_back(row("m", "h", "v", 3, "r1", NAN, 0, 5));
  p = aggregate_robustness(rows);
  CHECK(p[0].partial);
  CHECK(p[0].mean == doctest::Approx(0.3));

  std::vector<ResultRow> flat;
  for (int level = 1; level <= 5; ++level) flat.push_back(row("m", "h", "v", level, "r", 0.7));
  CHECK(aggregate_robustness(flat)[0].mean == doctest::Approx(0.7));
}

TEST_CASE("best hyperparameter") {
  std::vector<ProfileEntry> ps{profile("m", "A", "v1", 0.41), profile("m", "B", "v1", 0.44),
                               profile("solo", "only", "v1", 0.9)};
  auto best = select_best_hp(ps);
  CHECK(best["m"] == "A");
  CHECK(best["solo"] == "only");

  // Ties go to the smallest hp.
  ps.push_back(profile("t", "y", "v1", 0.5));
  ps.push_back(profile("t", "x", "v1", 0.5));
  CHECK(select_best_hp(ps)["t"] == "x");

  // Monotone transforms do not move the argmin.
  std::vector<ProfileEntry> mapped = ps;
  for (auto& p : mapped) p.mean = std::exp(3 * p.mean) + 1;
  CHECK(select_best_hp(mapped) == select_best_hp(ps));

  // Per violation.
  std::vector<ProfileEntry> pv{profile("m", "A", "v1", 0.1), profile("m", "B", "v1", 0.2),
                               profile("m", "A", "v2", 0.6), profile("m", "B", "v2", 0.3)};
  const auto per = select_best_hp_per_violation(pv);
  CHECK(per.at({"m", "v1"}) == "A");
  CHECK(per.at({"m", "v2"}) == "B");
  CHECK(select_best_hp(pv)["m"] == "B");
}

TEST_CASE("worst case") {
  std::vector<ResultRow> rows{row("m", "h", "v", 1, "r", 0.2), row("m", "h", "v", 2, "r", 0.9)};
  auto w = worst_case(rows);
  REQUIRE(w.size() == 1);
  CHECK(w[0].value == 0.9);
  CHECK(w[0].value >= aggregate_robustness(rows)[0].mean);

  CHECK(worst_case({row("m", "h", "v", 1, "r", 0.35)})[0].value == 0.35);

  for (auto& r : rows) r.metric = Metric::auroc;
  CHECK(worst_case(rows)[0].value == 0.2);
}
