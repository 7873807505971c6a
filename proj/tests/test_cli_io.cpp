#include <cmath>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "scratch.hpp"
#include "tcda/commands.hpp"
#include "tcda/error.hpp"
#include "tcda/io.hpp"
#include "tcda/report.hpp"
#include "tcda/store.hpp"

using namespace tcda;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

ResultRow row(const std::string& method, const std::string& violation, int level, const std::string& regime,
              Metric metric, double value) {
  ResultRow r;
  r.method = method;
  r.hp = "default";
  r.violation = violation;
  r.level = level;
  r.regime_id = regime;
  r.metric = metric;
  r.value = value;
  r.count = 1;
  return r;
}

std::string small_plan(const fs::path& out, int seed = 3) {
  json c = {{"out", out.string()},
            {"seed", seed},
            {"samples", 2},
            {"violations", {"obs_add", "none"}},
            {"levels", {1, 5}},
            {"regimes", {{{"num_vars", 3}, {"max_lag", 2}, {"length", 80}, {"p_lag", 0.15}, {"p_inst", 0.1}}}}};
  return c.dump();
}

std::vector<std::string> files_under(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("tensor container") {
  const auto dir = scratch_dir("tensor");
  const std::string p = (dir / "eye.tcda").string();
  const TensorData eye{{2, 2}, {1, 0, 0, 1}};
  write_tensor(p, eye);
  const TensorData back = read_tensor(p);
  CHECK(back.dims == eye.dims);
  CHECK(back.values == eye.values);

  // Little-endian layout: magic, version, rank, dims, payload.
  std::string bytes = read_text(p);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 32);
  CHECK(bytes.substr(0, 4) == "TCDA");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 2);

  std::string bad = bytes;
  bad[0] = 'X';
  write_text(p, bad);
  CHECK(code_of([&] { read_tensor(p); }) == ErrorCode::format);
  write_text(p, bytes.substr(0, bytes.size() - 3));
  CHECK(code_of([&] { read_tensor(p); }) == ErrorCode::format);
  CHECK(code_of([&] { write_tensor(p, TensorData{{}, {}}); }) != ErrorCode::io);
  std::string norank = bytes.substr(0, 8) + std::string(4, '\0');
  write_text(p, norank);
  CHECK(code_of([&] { read_tensor(p); }) == ErrorCode::format);
  CHECK(code_of([&] { read_tensor((dir / "missing.tcda").string()); }) == ErrorCode::io);
  CHECK(code_of([&] { write_tensor(p, TensorData{{1}, {NAN}}); }) == ErrorCode::numeric);
  fs::remove_all(dir);
}

TEST_CASE("results csv round trip") {
  std::vector<ResultRow> rows{row("m", "obs_add", 1, "r", Metric::auroc, 0.1 + 0.2),
                              row("m", "obs_add", 2, "r", Metric::auroc, NAN)};
  rows[1].count = 0;
  rows[1].failures = 4;
  const std::string csv = results_csv(rows);
  CHECK(csv.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
  const auto dir = scratch_dir("csv");
  const std::string p = (dir / "r.csv").string();
  write_results_csv(p, rows);
  const auto back = read_results_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == rows[0].value);
  CHECK(std::isnan(back[1].value));
  CHECK(back[1].failures == 4);
  CHECK(results_csv(back) == csv);
  rows[0].method = "a,b";
  CHECK_THROWS_AS(results_csv(rows), Error);
  fs::remove_all(dir);
}

TEST_CASE("model file round trip") {
  LinearEnsembleModel m;
  m.methods = {"gvar/pval_lag+0", "cross_corr/lag+0"};
  m.weights = {0.1 + 0.2, -1e-300};
  m.bias = 1.0 / 3;
  m.lambda = 1e-3;
  m.seed = 99;
  const auto dir = scratch_dir("model");
  const std::string p = (dir / "m.txt").string();
  write_model(p, m);
  const auto back = read_model(p);
  CHECK(back.methods == m.methods);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.lambda == m.lambda);
  CHECK(back.seed == 99);
  CHECK(back.normalization == Normalization::minmax);
  write_text(p, "format = something-else\n");
  CHECK_THROWS_AS(read_model(p), Error);
  fs::remove_all(dir);
}

TEST_CASE("report tables and charts") {
  CHECK_THROWS_AS(write_report(scratch_dir("empty_report").string(), {}), Error);

  std::vector<ResultRow> rows;
  for (int level = 1; level <= 5; ++level) {
    rows.push_back(row("a", "obs_add", level, "r1", Metric::shd_min_norm, 0.1 * level));
    rows.push_back(row("a", "obs_add", level, "r2", Metric::shd_min_norm, 0.1 * level + 0.2));
    rows.push_back(row("b", "obs_add", level, "r1", Metric::shd_min_norm, 0.45));
  }
  const auto tables = report_tables(rows);
  REQUIRE(tables.count("obs_add"));
  const auto& t = tables.at("obs_add");
  CHECK(t.size() == 10);
  for (const auto& r : t) {
    CHECK(r.row.regime_id == "all");
    if (r.row.method == "a" && r.row.level == 1) {
      CHECK(r.row.value == doctest::Approx(0.2));
      CHECK(r.rank == 1);
    }
    if (r.row.method == "a" && r.row.level == 5) CHECK(r.rank == 2);
  }
  const std::string csv = report_csv(t);
  CHECK(csv.rfind(std::string(kResultsHeader) + ",rank\n", 0) == 0);

  const auto curves = report_curves(t, GraphKind::lwcg, Metric::shd_min_norm);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].points.size() == 5);

  std::vector<ResultRow> one(rows.begin(), rows.begin() + 1);
  for (int level = 2; level <= 5; ++level) one.push_back(row("a", "v", level, "r", Metric::auroc, 0.5));
  one[0].violation = "v";
  one[0].metric = Metric::auroc;
  const auto only = report_curves(report_tables(one).at("v"), GraphKind::lwcg, Metric::auroc);
  REQUIRE(only.size() == 1);
  CHECK(only[0].points.size() == 5);

  const auto dir = scratch_dir("report");
  const auto files = write_report(dir.string(), rows);
  CHECK(std::find(files.begin(), files.end(), "obs_add.csv") != files.end());
  CHECK(std::find(files.begin(), files.end(), "obs_add__LWCG__shd_min_norm.svg") != files.end());
  const std::string svg = read_text((dir / "obs_add__LWCG__shd_min_norm.svg").string());
  CHECK(svg.find("<svg") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("generate, evaluate, aggregate and report commands") {
  const auto dir = scratch_dir("commands");
  const fs::path out = dir / "batches";
  cmd_generate(small_plan(out));
  // 2 violations, obs_add at 2 levels + none at level 0, 1 regime.
  const auto manifests = read_plan(out.string());
  CHECK(manifests.size() == 3);
  const auto samples = load_batches(out.string());
  CHECK(samples.size() == 6);
  CHECK(samples[0].id == sample_id(samples[0].violation, samples[0].level, samples[0].regime.id(), 0));

  // Same seed again: byte-identical files.
  const fs::path again = dir / "again";
  cmd_generate(small_plan(again));
  const auto names = files_under(out);
  REQUIRE(names == files_under(again));
  for (const auto& n : names) CHECK(read_text((out / n).string()) == read_text((again / n).string()));

  CHECK(code_of([&] {
          cmd_generate(json{{"out", (dir / "bad").string()}, {"violations", {"obs_nope"}}}.dump());
        }) == ErrorCode::config);

  // Two baselines x two hps each, LWCG only.
  const std::string results = (dir / "results.csv").string();
  json ev = {{"batches", out.string()},
             {"methods",
              {{{"method", "cross_corr"}, {"hp", {"lag+0", "lag+2"}}},
               {{"method", "gvar"}, {"hp", {"pval_lag+0", "coef_lag+0"}}}}},
             {"graphs", {"LWCG"}},
             {"metrics", {"shd_min_norm", "auroc"}},
             {"results", results}};
  cmd_evaluate(ev.dump());
  auto rows = read_results_csv(results);
  CHECK(rows.size() == 4 * 3 * 2);
  for (const auto& r : rows) CHECK(r.graph == GraphKind::lwcg);
  const std::string first = read_text(results);
  cmd_evaluate(ev.dump(), RunOptions{std::nullopt, 2, std::nullopt, std::nullopt});
  CHECK(read_text(results) == first);

  // Missing external predictions turn into failure rows.
  const std::string ext = (dir / "ext.csv").string();
  cmd_evaluate(json{{"batches", out.string()},
                    {"methods", {{{"method", "mystery"}, {"external", true}}}},
                    {"external_dir", (dir / "preds").string()},
                    {"results", ext}}
                   .dump());
  for (const auto& r : read_results_csv(ext)) {
    CHECK(r.count == 0);
    CHECK(r.failures == 2);
  }

  const std::string profile = (dir / "profile.csv").string();
  cmd_aggregate(json{{"results", results}, {"profile", profile}, {"best_hp", (dir / "best.csv").string()}}.dump());
  const auto profiles = read_profiles_csv(profile);
  CHECK(profiles.size() == 4 * 2 * 2);

  const fs::path rep = dir / "report";
  cmd_report(json{{"results", results}, {"out", rep.string()}}.dump());
  CHECK(fs::exists(rep / "obs_add.csv"));
  CHECK(fs::exists(rep / "none.csv"));

  // Ensembles over the two cross-correlation settings.
  const std::string model = (dir / "model.txt").string();
  json methods = {{{"method", "cross_corr"}, {"hp", {"lag+0", "lag+2"}}}};
  cmd_ensemble_train(json{{"batches", out.string()}, {"methods", methods}, {"lambda", 0.01}, {"model", model}}.dump());
  CHECK(read_model(model).weights.size() == 2);
  const fs::path preds = dir / "ens";
  cmd_ensemble_apply(json{{"batches", out.string()}, {"methods", methods}, {"kind", "linear"}, {"model", model},
                          {"out", preds.string()}}
                         .dump());
  CHECK(fs::exists(preds / "linear_ensemble" / "default" / (samples[0].id + ".lagged.tcda")));
  fs::remove_all(dir);
}

TEST_CASE("hand-edited manifests are rejected") {
  const auto dir = scratch_dir("manifest");
  const fs::path out = dir / "b";
  cmd_generate(small_plan(out));
  const std::string path = (out / read_plan(out.string())[0]).string();
  const std::string original = read_text(path);
  CHECK_NOTHROW(load_batch(path));

  json j = json::parse(original);
  j["samples"][0]["num_vars"] = 4;
  write_text(path, j.dump(2));
  CHECK_THROWS_AS(load_batch(path), Error);

  j = json::parse(original);
  j["regime"]["max_lag"] = 3;
  write_text(path, j.dump(2));
  CHECK_THROWS_AS(load_batch(path), Error);

  j = json::parse(original);
  j["samples"][1]["index"] = 5;
  write_text(path, j.dump(2));
  CHECK_THROWS_AS(read_manifest(path), Error);

  j = json::parse(original);
  j["schema"] = 99;
  write_text(path, j.dump(2));
  CHECK_THROWS_AS(read_manifest(path), Error);
  fs::remove_all(dir);
}

TEST_CASE("registry dump") {
  const std::string csv = registry_csv(ScheduleVariant::table);
  CHECK(csv.rfind("violation,slot,needs_inst,level,variant,parameter,values\n", 0) == 0);
  CHECK(csv.find("obs_add,observation,0,3,table,snr,0.575") != std::string::npos);
}
