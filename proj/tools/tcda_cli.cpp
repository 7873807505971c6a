// Command-line front end. Talks to the library only through tcda.h.
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcda/tcda.h"

using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  uint64_t seed = 0;
  int jobs = 1;
  std::string variant;
  std::string exogenous;
};

// Flag values keyed by config key; only flags the user actually passed end
// up in the merged config.
struct Overrides {
  std::map<std::string, std::string> strings;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, double> numbers;
  std::map<std::string, int> ints;
};

json method_list(const std::vector<std::string>& specs) {
  json out = json::array();
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      out.push_back({{"method", s}});
    } else {
      out.push_back({{"method", s.substr(0, colon)}, {"hp", s.substr(colon + 1)}});
    }
  }
  return out;
}

json load_config(const std::string& path, const std::string& section) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j = json::parse(in);
  if (j.contains(section) && j.at(section).is_object()) return j.at(section);
  return j;
}

json merged(const Globals& g, const std::string& section, const CLI::App& sub, const Overrides& o) {
  json cfg = load_config(g.config, section);
  for (const auto& [k, v] : o.strings) {
    if (sub.count("--" + k) > 0) cfg[k] = v;
  }
  for (const auto& [k, v] : o.numbers) {
    if (sub.count("--" + k) > 0) cfg[k] = v;
  }
  for (const auto& [k, v] : o.ints) {
    if (sub.count("--" + k) > 0) cfg[k] = v;
  }
  for (const auto& [k, v] : o.lists) {
    if (sub.count("--" + k) == 0) continue;
    if (k == "method") {
      cfg["methods"] = method_list(v);
    } else if (k == "levels") {
      json levels = json::array();
      for (const auto& s : v) levels.push_back(std::stoi(s));
      cfg["levels"] = levels;
    } else {
      cfg[k] = v;
    }
  }
  // Config keys use underscores, flags use dashes.
  json out = json::object();
  for (auto& [k, v] : cfg.items()) {
    std::string key = k;
    for (char& c : key) c = c == '-' ? '_' : c;
    out[key] = v;
  }
  return out;
}

int finish(tcda_status st) {
  if (st != TCDA_OK) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(st), tcda_last_error());
    return static_cast<int>(st);
  }
  const std::string summary = tcda_last_summary();
  if (!summary.empty()) std::fprintf(stderr, "%s\n", summary.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic time-series causal discovery benchmark"};
  app.set_version_flag("--version", std::string(tcda_version()));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file (a section named after the command is used if present)")
      ->envname("TCDA_CONFIG");
  app.add_option("--seed", g.seed, "Master seed")->envname("TCDA_SEED");
  app.add_option("--jobs", g.jobs, "Worker threads, 0 for all cores")->envname("TCDA_JOBS")->check(CLI::NonNegativeNumber);
  app.add_option("--schedule-variant", g.variant, "Level schedules: table or appendix")
      ->envname("TCDA_SCHEDULE_VARIANT")
      ->check(CLI::IsMember({"table", "appendix"}));
  app.add_option("--exogenous-path", g.exogenous, "Real-data pool for obs_real, inno_real and mar")
      ->envname("TCDA_EXOGENOUS_PATH");

  std::map<std::string, std::pair<CLI::App*, Overrides>> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    auto& entry = subs[name];
    entry.first = app.add_subcommand(name, help);
    return &entry;
  };
  auto str = [](std::pair<CLI::App*, Overrides>* e, const std::string& key, const std::string& help) {
    e->first->add_option("--" + key, e->second.strings[key], help);
  };
  auto list = [](std::pair<CLI::App*, Overrides>* e, const std::string& key, const std::string& help) {
    e->first->add_option("--" + key, e->second.lists[key], help);
  };

  auto* gen = add("gen", "Generate sample batches");
  str(gen, "out", "Output directory");
  gen->first->add_option("--samples", gen->second.ints["samples"], "Samples per (violation, level, regime)");
  list(gen, "violations", "Violation ids, composites joined by '+', or none");
  list(gen, "levels", "Levels to generate (default 1..5)");

  auto* ev = add("evaluate", "Score batches with baselines or external predictions");
  str(ev, "batches", "Directory written by gen");
  list(ev, "method", "METHOD[:HP]; native baselines without HP expand to their grid");
  str(ev, "external-dir", "Prediction directory for external methods");
  list(ev, "graphs", "Graph kinds (LWCG, INST, LSG)");
  list(ev, "metrics", "Metrics (shd_min_norm, auroc, f1_max, acc_max)");
  str(ev, "results", "Results CSV path");

  auto* ag = add("aggregate", "Robustness profiles, worst cases and hyperparameter selection");
  str(ag, "results", "Results CSV");
  str(ag, "profile", "Profile CSV output");
  str(ag, "worst-case", "Worst-case CSV output");
  str(ag, "best-hp", "Selected hyperparameters CSV output");
  str(ag, "best-hp-per-violation", "Per-violation selection CSV output");
  str(ag, "graph", "Graph used for selection");
  str(ag, "metric", "Metric used for selection");

  auto* et = add("ensemble-train", "Fit the linear ensemble on an independent batch set");
  str(et, "batches", "Training batches");
  list(et, "method", "Input METHOD[:HP], in order");
  str(et, "external-dir", "Prediction directory for external inputs");
  et->first->add_option("--lambda", et->second.numbers["lambda"], "Ridge penalty on the weights");
  str(et, "normalization", "minmax or none");
  str(et, "model", "Model file output");

  auto* ea = add("ensemble-apply", "Write ensemble predictions in the external layout");
  str(ea, "batches", "Batches to predict");
  list(ea, "method", "Input METHOD[:HP], in order");
  str(ea, "external-dir", "Prediction directory for external inputs");
  str(ea, "kind", "linear, average or pareto");
  str(ea, "model", "Linear model file");
  str(ea, "profile", "Profile CSV for the pareto oracle");
  str(ea, "graph", "Graph for the pareto oracle");
  str(ea, "metric", "Metric for the pareto oracle");
  str(ea, "out", "Prediction directory to write");
  str(ea, "name", "Method name of the written predictions");

  auto* rp = add("report", "Per-violation tables and SVG curves");
  str(rp, "results", "Results CSV");
  str(rp, "out", "Report directory");

  auto* rd = add("registry-dump", "Print every violation's resolved parameters");
  std::string registry_out = "-";
  rd->first->add_option("--out", registry_out, "CSV path, '-' for stdout");

  CLI11_PARSE(app, argc, argv);

  tcda_options* opts = tcda_options_create();
  if (opts == nullptr) return TCDA_E_INTERNAL;
  int rc = 0;
  try {
    tcda_status st = TCDA_OK;
    if (app.count("--seed") > 0) st = tcda_options_set_seed(opts, g.seed);
    if (st == TCDA_OK && app.count("--jobs") > 0) st = tcda_options_set_jobs(opts, g.jobs);
    if (st == TCDA_OK && app.count("--schedule-variant") > 0) st = tcda_options_set_schedule_variant(opts, g.variant.c_str());
    if (st == TCDA_OK && app.count("--exogenous-path") > 0) st = tcda_options_set_exogenous_path(opts, g.exogenous.c_str());
    if (st != TCDA_OK) {
      rc = finish(st);
    } else if (rd->first->parsed()) {
      rc = finish(tcda_registry_dump(opts, registry_out.c_str()));
    } else {
      using Fn = tcda_status (*)(const tcda_options*, const char*);
      const std::map<std::string, Fn> fns = {{"gen", tcda_generate},
                                             {"evaluate", tcda_evaluate},
                                             {"aggregate", tcda_aggregate},
                                             {"ensemble-train", tcda_ensemble_train},
                                             {"ensemble-apply", tcda_ensemble_apply},
                                             {"report", tcda_report}};
      for (const auto& [name, entry] : subs) {
        if (!entry.first->parsed() || fns.count(name) == 0) continue;
        std::string section = name;
        for (char& c : section) c = c == '-' ? '_' : c;
        const std::string cfg = merged(g, section, *entry.first, entry.second).dump();
        rc = finish(fns.at(name)(opts, cfg.c_str()));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    rc = TCDA_E_CONFIG;
  }
  tcda_options_free(opts);
  return rc;
}
