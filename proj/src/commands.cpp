#include "tcda/commands.hpp"

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "tcda/ensemble.hpp"
#include "tcda/error.hpp"
#include "tcda/generator.hpp"
#include "tcda/io.hpp"
#include "tcda/parallel.hpp"
#include "tcda/report.hpp"
#include "tcda/store.hpp"

namespace tcda {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pool seed when no exogenous CSV is configured; any fixed value works.
constexpr std::uint64_t kSyntheticPoolSalt = 0x9e3779b97f4a7c15ULL;

json parse_config(const std::string& text) {
  try {
    json j = text.empty() ? json::object() : json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("invalid config: ") + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("config key '") + key + "': " + e.what());
  }
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::config, std::string("config key '") + key + "' is required");
  return get_or<std::string>(j, key, "");
}

std::uint64_t seed_of(const json& cfg, const RunOptions& run) {
  return run.seed ? *run.seed : get_or<std::uint64_t>(cfg, "seed", 0);
}

int jobs_of(const json& cfg, const RunOptions& run) {
  const int jobs = run.jobs ? *run.jobs : get_or<int>(cfg, "jobs", 1);
  if (jobs < 0) throw Error(ErrorCode::config, "jobs must be >= 0");
  return jobs;
}

ScheduleVariant variant_of(const json& cfg, const RunOptions& run) {
  if (run.variant) return *run.variant;
  return parse_schedule_variant(get_or<std::string>(cfg, "schedule_variant", "table"));
}

std::vector<std::string> split_plus(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, '+')) out.push_back(part);
  return out;
}

std::vector<Regime> regimes_of(const json& cfg) {
  if (!cfg.contains("regimes") || cfg.at("regimes") == "default") return default_regimes();
  std::vector<Regime> out;
  try {
    for (const auto& r : cfg.at("regimes")) {
      Regime g;
      g.num_vars = r.at("num_vars").get<int>();
      g.max_lag = r.at("max_lag").get<int>();
      g.length = r.at("length").get<int>();
      g.p_lag = r.at("p_lag").get<double>();
      g.p_inst = r.value("p_inst", 0.0);
      if (g.num_vars < 2 || g.max_lag < 1 || g.length < 1 || g.p_lag < 0 || g.p_lag > 1 || g.p_inst < 0 ||
          g.p_inst > 1) {
        throw Error(ErrorCode::config, "invalid regime " + g.id());
      }
      out.push_back(g);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("config key 'regimes': ") + e.what());
  }
  if (out.empty()) throw Error(ErrorCode::config, "no regimes configured");
  return out;
}

std::vector<GraphKind> graphs_of(const json& cfg) {
  if (!cfg.contains("graphs")) return all_graphs();
  std::vector<GraphKind> out;
  for (const auto& g : cfg.at("graphs")) out.push_back(parse_graph(g.get<std::string>()));
  return out;
}

std::vector<Metric> metrics_of(const json& cfg) {
  if (!cfg.contains("metrics")) return all_metrics();
  std::vector<Metric> out;
  for (const auto& m : cfg.at("metrics")) out.push_back(parse_metric(m.get<std::string>()));
  return out;
}

std::string methods_text(const json& cfg) {
  if (!cfg.contains("methods")) throw Error(ErrorCode::config, "config key 'methods' is required");
  return cfg.at("methods").dump();
}

const char* slot_name(Slot s) {
  switch (s) {
    case Slot::none: return "none";
    case Slot::obs: return "observation";
    case Slot::inno: return "innovation";
    case Slot::conf_inst: return "confounding_inst";
    case Slot::conf_lag: return "confounding_lag";
    case Slot::faith: return "faithfulness";
    case Slot::nl: return "nonlinearity";
    case Slot::stationarity: return "stationarity";
    case Slot::length: return "length";
    case Slot::missing: return "missing";
    case Slot::empty: return "empty";
    case Slot::scale: return "scale";
  }
  return "?";
}

std::string label(const Scorer& s) { return s.method + "/" + s.hp; }

// Scores every sample with every scorer; samples where any scorer fails are
// dropped and counted.
struct Stacked {
  std::vector<const EvalSample*> samples;
  std::vector<std::vector<ScoreGraph>> graphs;
  int skipped = 0;
};

Stacked stack_scores(const std::vector<EvalSample>& samples, const std::vector<Scorer>& scorers, int jobs) {
  std::vector<std::optional<std::vector<ScoreGraph>>> per(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t k) {
    std::vector<ScoreGraph> gs;
    try {
      for (const auto& s : scorers) {
        ScoreGraph g = s.score(samples[k]);
        validate_scores(g, static_cast<int>(samples[k].x.rows()), g.model_lags());
        g.method = s.method;
        g.hp = s.hp;
        gs.push_back(std::move(g));
      }
    } catch (const Error&) {
      return;
    }
    per[k] = std::move(gs);
  });
  Stacked out;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!per[k]) {
      ++out.skipped;
      continue;
    }
    out.samples.push_back(&samples[k]);
    out.graphs.push_back(std::move(*per[k]));
  }
  return out;
}

}  // namespace

std::vector<Scorer> resolve_scorers(const std::string& methods_json, const std::string& external_dir) {
  json methods;
  try {
    methods = json::parse(methods_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("invalid methods list: ") + e.what());
  }
  if (!methods.is_array() || methods.empty()) throw Error(ErrorCode::config, "methods must be a non-empty list");
  std::vector<Scorer> out;
  for (const auto& m : methods) {
    const json entry = m.is_string() ? json{{"method", m}} : m;
    const std::string method = require_string(entry, "method");
    const bool native = method == kCrossCorrelation || method == kGvar;
    const bool external = get_or<bool>(entry, "external", !native);
    std::vector<std::string> hps;
    if (entry.contains("hp")) {
      if (entry.at("hp").is_array()) {
        hps = entry.at("hp").get<std::vector<std::string>>();
      } else {
        hps.push_back(entry.at("hp").get<std::string>());
      }
    }
    if (!external) {
      if (hps.empty()) {
        for (const auto& spec : baseline_grid(method)) out.push_back(baseline_scorer(spec));
      } else {
        for (const auto& hp : hps) out.push_back(baseline_scorer(find_baseline(method, hp)));
      }
      continue;
    }
    if (external_dir.empty()) throw Error(ErrorCode::config, "external method " + method + " needs external_dir");
    if (hps.empty()) hps.push_back("default");
    for (const auto& hp : hps) out.push_back(external_scorer(external_dir, method, hp));
  }
  return out;
}

std::string cmd_generate(const std::string& config_json, const RunOptions& run) {
  const json cfg = parse_config(config_json);
  const std::string out = require_string(cfg, "out");
  const std::uint64_t seed = seed_of(cfg, run);
  const ScheduleVariant variant = variant_of(cfg, run);
  const int jobs = jobs_of(cfg, run);
  const int samples = get_or<int>(cfg, "samples", 100);
  if (samples < 1) throw Error(ErrorCode::config, "samples must be >= 1");
  const auto levels = get_or<std::vector<int>>(cfg, "levels", {1, 2, 3, 4, 5});
  if (!cfg.contains("violations")) throw Error(ErrorCode::config, "config key 'violations' is required");
  const auto violations = get_or<std::vector<std::string>>(cfg, "violations", {});
  const std::vector<Regime> regimes = regimes_of(cfg);

  std::vector<PlanItem> plan;
  for (const auto& v : violations) {
    if (v == kNoViolation) {
      const CompositeConfig c = compose({unviolated()});
      for (const auto& r : regimes) plan.push_back({r, c, samples});
      continue;
    }
    const auto ids = split_plus(v);
    for (const auto& id : ids) {
      if (!is_known_violation(id)) throw Error(ErrorCode::config, "unknown violation id: " + id);
    }
    for (int level : levels) {
      if (level < 1 || level > 5) throw Error(ErrorCode::config, "levels must lie in 1..5");
      std::vector<ViolationConfig> parts;
      for (const auto& id : ids) parts.push_back(resolve(id, level, variant));
      const CompositeConfig c = compose(parts);
      for (const auto& r : compatible_regimes(c, regimes)) plan.push_back({r, c, samples});
    }
  }
  if (plan.empty()) throw Error(ErrorCode::config, "the plan is empty");

  const std::string exo = run.exogenous_path ? *run.exogenous_path : get_or<std::string>(cfg, "exogenous_path", "");
  const ExogenousPool pool = exo.empty() ? ExogenousPool::synthetic(seed ^ kSyntheticPoolSalt) : ExogenousPool::from_csv(exo);
  GeneratorOptions options;
  options.pool = &pool;

  std::vector<std::string> manifests;
  long total = 0;
  for (const auto& item : plan) {
    const auto records = generate_batch({item}, seed, options, jobs);
    manifests.push_back(write_batch(out, records, seed, variant));
    total += static_cast<long>(records.size());
  }
  write_plan(out, manifests, seed, variant);
  return "generated " + std::to_string(total) + " samples in " + std::to_string(manifests.size()) + " batches under " +
         out;
}

std::string cmd_evaluate(const std::string& config_json, const RunOptions& run) {
  const json cfg = parse_config(config_json);
  const std::string batches = require_string(cfg, "batches");
  const std::string results = require_string(cfg, "results");
  const auto scorers = resolve_scorers(methods_text(cfg), get_or<std::string>(cfg, "external_dir", ""));
  EvalOptions options;
  options.graphs = graphs_of(cfg);
  options.metrics = metrics_of(cfg);
  options.jobs = jobs_of(cfg, run);
  const auto samples = load_batches(batches);
  const auto rows = run_protocol(samples, scorers, options);
  write_results_csv(results, rows);
  long failures = 0;
  for (const auto& r : rows) failures += r.failures;
  return "wrote " + std::to_string(rows.size()) + " rows (" + std::to_string(samples.size()) + " samples, " +
         std::to_string(scorers.size()) + " method/hp combinations, " + std::to_string(failures) +
         " failed or undefined evaluations) to " + results;
}

std::string cmd_aggregate(const std::string& config_json, const RunOptions&) {
  const json cfg = parse_config(config_json);
  const auto rows = read_results_csv(require_string(cfg, "results"));
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "results file has no rows");
  const auto profiles = aggregate_robustness(rows);
  const std::string profile = require_string(cfg, "profile");
  write_text(profile, profiles_csv(profiles));
  std::string summary = "wrote " + std::to_string(profiles.size()) + " profile entries to " + profile;

  const GraphKind graph = parse_graph(get_or<std::string>(cfg, "graph", "LWCG"));
  const Metric metric = parse_metric(get_or<std::string>(cfg, "metric", "shd_min_norm"));
  if (const auto path = get_or<std::string>(cfg, "worst_case", ""); !path.empty()) {
    std::string csv = "method,hp_id,violation,graph,metric,value\n";
    for (const auto& w : worst_case(rows)) {
      csv += w.method + "," + w.hp + "," + w.violation + "," + graph_name(w.graph) + "," + metric_name(w.metric) +
             "," + format_double(w.value) + "\n";
    }
    write_text(path, csv);
  }
  if (const auto path = get_or<std::string>(cfg, "best_hp", ""); !path.empty()) {
    std::string csv = "method,hp_id\n";
    for (const auto& [method, hp] : select_best_hp(profiles, graph, metric)) csv += method + "," + hp + "\n";
    write_text(path, csv);
  }
  if (const auto path = get_or<std::string>(cfg, "best_hp_per_violation", ""); !path.empty()) {
    std::string csv = "method,violation,hp_id\n";
    for (const auto& [k, hp] : select_best_hp_per_violation(profiles, graph, metric)) {
      csv += k.first + "," + k.second + "," + hp + "\n";
    }
    write_text(path, csv);
  }
  return summary;
}

std::string cmd_ensemble_train(const std::string& config_json, const RunOptions& run) {
  const json cfg = parse_config(config_json);
  const auto scorers = resolve_scorers(methods_text(cfg), get_or<std::string>(cfg, "external_dir", ""));
  const auto samples = load_batches(require_string(cfg, "batches"));
  const double lambda = get_or<double>(cfg, "lambda", 1e-3);
  const Normalization norm = parse_normalization(get_or<std::string>(cfg, "normalization", "minmax"));
  const Stacked st = stack_scores(samples, scorers, jobs_of(cfg, run));
  std::vector<TrainingExample> examples;
  for (std::size_t k = 0; k < st.samples.size(); ++k) examples.push_back({st.graphs[k], st.samples[k]->truth});
  if (examples.empty()) throw Error(ErrorCode::invalid_argument, "no training sample could be scored by every method");
  std::vector<std::string> labels;
  for (const auto& s : scorers) labels.push_back(label(s));
  LinearEnsembleModel model = train_linear(examples, lambda, norm, labels);
  model.seed = seed_of(cfg, run);
  const std::string path = require_string(cfg, "model");
  write_model(path, model);
  std::string summary = "trained on " + std::to_string(examples.size()) + " samples (" + std::to_string(st.skipped) +
                        " skipped); weights";
  for (std::size_t j = 0; j < labels.size(); ++j) summary += " " + labels[j] + "=" + format_double(model.weights[j]);
  return summary + " bias=" + format_double(model.bias) + "; model written to " + path;
}

std::string cmd_ensemble_apply(const std::string& config_json, const RunOptions& run) {
  const json cfg = parse_config(config_json);
  const auto scorers = resolve_scorers(methods_text(cfg), get_or<std::string>(cfg, "external_dir", ""));
  const auto samples = load_batches(require_string(cfg, "batches"));
  const std::string kind = get_or<std::string>(cfg, "kind", "linear");
  const std::string out = require_string(cfg, "out");
  std::vector<std::string> labels;
  for (const auto& s : scorers) labels.push_back(label(s));

  std::optional<LinearEnsembleModel> model;
  RobustnessTable table;
  if (kind == "linear") {
    model = read_model(require_string(cfg, "model"));
    if (!model->methods.empty() && model->methods != labels) {
      throw Error(ErrorCode::config, "methods do not match the inputs the model was trained on");
    }
  } else if (kind == "pareto") {
    const GraphKind graph = parse_graph(get_or<std::string>(cfg, "graph", "LWCG"));
    const Metric metric = parse_metric(get_or<std::string>(cfg, "metric", "shd_min_norm"));
    for (const auto& p : read_profiles_csv(require_string(cfg, "profile"))) {
      const std::string l = p.method + "/" + p.hp;
      if (p.graph != graph || p.metric != metric) continue;
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) continue;
      table[p.violation][l] = lower_is_better(metric) ? p.mean : -p.mean;
    }
  } else if (kind != "average") {
    throw Error(ErrorCode::config, "unknown ensemble kind: " + kind);
  }
  const std::string name = get_or<std::string>(cfg, "name", kind == "pareto" ? "pareto_oracle" : kind + "_ensemble");
  const std::string hp = get_or<std::string>(cfg, "hp", "default");

  const Stacked st = stack_scores(samples, scorers, jobs_of(cfg, run));
  const fs::path dir = fs::path(out) / name / hp;
  fs::create_directories(dir);
  parallel_for(st.samples.size(), jobs_of(cfg, run), [&](std::size_t k) {
    const EvalSample& s = *st.samples[k];
    ScoreGraph g;
    if (kind == "linear") {
      g = apply_linear(*model, st.graphs[k]);
    } else if (kind == "average") {
      std::vector<ScoreGraph> gs = common_shape(st.graphs[k]);
      for (auto& x : gs) x = normalize_minmax(x);
      g = ensemble_average(gs);
    } else {
      g = pareto_oracle(table, s.violation, st.graphs[k]);
    }
    const std::string stem = (dir / s.id).string();
    write_tensor(stem + ".lagged.tcda", to_tensor(g.lagged));
    if (g.inst) write_tensor(stem + ".inst.tcda", to_tensor(*g.inst));
  });
  return "wrote " + std::to_string(st.samples.size()) + " ensemble predictions (" + std::to_string(st.skipped) +
         " samples skipped) to " + dir.string();
}

std::string cmd_report(const std::string& config_json, const RunOptions&) {
  const json cfg = parse_config(config_json);
  const auto rows = read_results_csv(require_string(cfg, "results"));
  const std::string out = require_string(cfg, "out");
  const auto files = write_report(out, rows);
  return "wrote " + std::to_string(files.size()) + " report files to " + out;
}

std::string registry_csv(ScheduleVariant variant) {
  std::string csv = "violation,slot,needs_inst,level,variant,parameter,values\n";
  for (const auto& info : violation_catalog()) {
    for (int level = 1; level <= 5; ++level) {
      const ViolationConfig c = resolve(info.id, level, variant);
      for (const auto& [name, values] : c.resolved) {
        std::string vs;
        for (std::size_t k = 0; k < values.size(); ++k) vs += (k ? ";" : "") + format_double(values[k]);
        csv += info.id + "," + slot_name(info.slot) + "," + (info.needs_inst ? "1" : "0") +
               "," + std::to_string(level) + "," + schedule_variant_name(variant) + "," + name + "," + vs + "\n";
      }
    }
  }
  return csv;
}

}  // namespace tcda
