#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tcda/error.hpp"
#include "tcda/metrics.hpp"
#include "tcda/rng.hpp"

using namespace tcda;

namespace {

struct Instance {
  std::vector<double> scores, truth;
};

// Coarse score grid so ties are common.
Instance random_instance(Rng& rng, int max_slots = 30) {
  const int n = uniform_int(rng, 2, max_slots);
  Instance in;
  for (int k = 0; k < n; ++k) {
    in.scores.push_back(uniform_int(rng, 0, 6) / 6.0);
    in.truth.push_back(bernoulli(rng, 0.3) ? 1.0 : 0.0);
  }
  in.truth[uniform_int(rng, 0, n - 1)] = 1.0;
  return in;
}

bool has_negative(const std::vector<double>& t) {
  return std::any_of(t.begin(), t.end(), [](double v) { return v == 0.0; });
}

}  // namespace

TEST_CASE("perfect scores") {
  const std::vector<double> t{0, 1, 0, 1, 1, 0};
  CHECK(shd_min_norm(t, t) == 0.0);
  CHECK(auroc(t, t) == 1.0);
  CHECK(f1_max(t, t) == 1.0);
  CHECK(acc_max(t, t) == 1.0);
}

TEST_CASE("hand-enumerated two-variable case") {
  // truth has only (0, 1) at lag 1; flattened row-major over (target, source).
  const std::vector<double> scores{0.1, 0.9, 0.2, 0.05};
  const std::vector<double> truth{0, 1, 0, 0};
  CHECK(shd_min_norm(scores, truth) == 0.0);
}

TEST_CASE("ties and degenerate inputs") {
  const std::vector<double> flat(6, 0.3);
  const std::vector<double> t{1, 0, 0, 1, 0, 0};
  CHECK(auroc(flat, t) == 0.5);
  CHECK(acc_max(std::vector<double>(6, 0.0), t) == doctest::Approx(4.0 / 6));
  CHECK_THROWS_AS(shd_min_norm(flat, std::vector<double>(6, 0.0)), Error);
  CHECK_THROWS_AS(auroc(flat, std::vector<double>(6, 1.0)), Error);
  CHECK_THROWS_AS(f1_max(flat, std::vector<double>(6, 0.0)), Error);
  try {
    auroc(flat, std::vector<double>(6, 0.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined);
  }
}

TEST_CASE("three edges against three non-edges") {
  const std::vector<double> s{0.9, 0.4, 0.4, 0.5, 0.1, 0.4};
  const std::vector<double> t{1, 1, 0, 0, 1, 0};
  // Pairs: 0.9 beats all 3; 0.4 beats 0 of {0.4, 0.5, 0.4} plus 2 ties; 0.1 beats none.
  CHECK(auroc(s, t) == doctest::Approx(4.0 / 9).epsilon(1e-15));
  CHECK(auroc(s, t) == oracle::auroc(s, t));
}

TEST_CASE("metrics equal brute-force enumeration") {
  Rng rng(1);
  for (int rep = 0; rep < 2000; ++rep) {
    const Instance in = random_instance(rng);
    REQUIRE(shd_min_norm(in.scores, in.truth) == oracle::shd(in.scores, in.truth));
    REQUIRE(f1_max(in.scores, in.truth) == oracle::f1(in.scores, in.truth));
    REQUIRE(acc_max(in.scores, in.truth) == oracle::acc(in.scores, in.truth));
    if (has_negative(in.truth)) REQUIRE(auroc(in.scores, in.truth) == doctest::Approx(oracle::auroc(in.scores, in.truth)).epsilon(1e-12));
  }
}

TEST_CASE("minimum never exceeds any single threshold") {
  Rng rng(2);
  for (int rep = 0; rep < 500; ++rep) {
    const Instance in = random_instance(rng);
    double pos = 0;
    for (double v : in.truth) pos += v;
    const double best = shd_min_norm(in.scores, in.truth);
    for (double tau : oracle::thresholds(in.scores)) {
      const auto c = oracle::confusion(in.scores, in.truth, tau);
      CHECK(best <= (c.fp + c.fn) / pos);
    }
  }
}

TEST_CASE("metrics are invariant under monotone transforms") {
  Rng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    const Instance in = random_instance(rng);
    if (!has_negative(in.truth)) continue;
    std::vector<double> mapped;
    const double a = uniform(rng, 0.1, 5.0), b = uniform(rng, -3, 3);
    for (double s : in.scores) mapped.push_back(std::exp(a * s) + b);
    CHECK(shd_min_norm(mapped, in.truth) == shd_min_norm(in.scores, in.truth));
    CHECK(f1_max(mapped, in.truth) == f1_max(in.scores, in.truth));
    CHECK(acc_max(mapped, in.truth) == acc_max(in.scores, in.truth));
    CHECK(auroc(mapped, in.truth) == auroc(in.scores, in.truth));
  }
}

TEST_CASE("symmetric scores cannot beat the undirected floor") {
  Rng rng(4);
  for (int rep = 0; rep < 300; ++rep) {
    const int d = uniform_int(rng, 2, 7);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d), t = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        s(i, j) = s(j, i) = uniform_int(rng, 0, 4) / 4.0;
        if (bernoulli(rng, 0.4)) (bernoulli(rng, 0.5) ? t(i, j) : t(j, i)) = 1.0;
      }
    }
    if (t.sum() == 0) t(0, 1) = 1.0;
    CHECK(shd_min_norm(flatten(s, true), flatten(t, true)) >= 1.0);
  }
}

TEST_CASE("summary scores take the maximum over lags") {
  Tensor3 g(2, 2, 3);
  g(0, 1, 0) = 0.3;
  g(0, 1, 2) = 0.7;
  g(1, 0, 1) = 0.2;
  const Eigen::MatrixXd s = lsg_from_scores(g);
  CHECK(s(0, 1) == 0.7);
  CHECK(s(1, 0) == 0.2);
  CHECK(s(0, 0) == 0.0);

  Tensor3 same(2, 2, 2, 0.4);
  CHECK((lsg_from_scores(same).array() == 0.4).all());
}

TEST_CASE("flattening") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  CHECK(flatten(m, true) == std::vector<double>{2, 3});
  CHECK(flatten(m, false) == std::vector<double>{1, 2, 3, 4});
  CHECK(parse_graph("lwcg") == GraphKind::lwcg);
  CHECK(parse_graph("INST") == GraphKind::inst);
  CHECK(parse_metric("f1_max") == Metric::f1_max);
  CHECK(lower_is_better(Metric::shd_min_norm));
  CHECK_FALSE(lower_is_better(Metric::auroc));
}
