#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcda/harness.hpp"
#include "tcda/violations.hpp"

namespace tcda {

// Values set here override the matching keys of a command's JSON config.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<ScheduleVariant> variant;
  std::optional<std::string> exogenous_path;
};

// Each command takes its configuration as a JSON document. Keys:
//
// generate:  out, seed, samples, violations (ids, "a+b" composites or "none"),
//            levels, regimes ("default" or a list of regime objects),
//            schedule_variant, exogenous_path, jobs
// evaluate:  batches, methods [{method, hp?, external?}], external_dir,
//            graphs, metrics, results, jobs
// aggregate: results, profile, worst_case?, best_hp?, graph, metric
// ensemble_train: batches, methods, external_dir, lambda, normalization, model
// ensemble_apply: batches, methods, external_dir, kind (linear|average|pareto),
//            model (linear), profile + graph + metric (pareto), out, name
// report:    results, out
//
// Every command returns a short human-readable summary.
std::string cmd_generate(const std::string& config_json, const RunOptions& run = {});
std::string cmd_evaluate(const std::string& config_json, const RunOptions& run = {});
std::string cmd_aggregate(const std::string& config_json, const RunOptions& run = {});
std::string cmd_ensemble_train(const std::string& config_json, const RunOptions& run = {});
std::string cmd_ensemble_apply(const std::string& config_json, const RunOptions& run = {});
std::string cmd_report(const std::string& config_json, const RunOptions& run = {});

// violation,slot,needs_inst,level,variant,parameter,values
std::string registry_csv(ScheduleVariant variant);

// Resolves {method, hp?, external?} entries into scorers. Native baselines
// without an hp expand to their whole grid.
std::vector<Scorer> resolve_scorers(const std::string& methods_json, const std::string& external_dir);

}  // namespace tcda
