#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcda/ensemble.hpp"
#include "tcda/generator.hpp"
#include "tcda/harness.hpp"

namespace tcda {

inline constexpr int kManifestSchema = 1;

struct BatchEntry {
  int index = 0;
  std::string id;
  std::uint64_t seed = 0;
  int attempts = 0;
  int num_vars = 0;  // observed variables; one less than the regime when a confounder is hidden
  std::string series;  // paths relative to the manifest
  std::string lwcg;
  std::string inst;
};

struct BatchManifest {
  int schema = kManifestSchema;
  std::string violation;
  int level = 0;
  Regime regime;
  std::uint64_t master_seed = 0;
  std::string schedule_variant;
  std::vector<BatchEntry> samples;
};

// "<violation>_L<level>/<regime id>"
std::string batch_dir(const std::string& violation, int level, const Regime& regime);

// Writes the tensors and manifest.json of one batch under root/batch_dir(...).
// Returns the manifest path relative to root.
std::string write_batch(const std::string& root, const std::vector<SampleRecord>& records,
                        std::uint64_t master_seed, ScheduleVariant variant);
BatchManifest read_manifest(const std::string& path);
// Loads and cross-checks every referenced tensor.
std::vector<EvalSample> load_batch(const std::string& manifest_path);

// plan.json lists the manifests of a generation run in plan order.
void write_plan(const std::string& root, const std::vector<std::string>& manifests,
                std::uint64_t master_seed, ScheduleVariant variant);
std::vector<std::string> read_plan(const std::string& root);
std::vector<EvalSample> load_batches(const std::string& root);

inline constexpr const char* kResultsHeader =
    "method,hp_id,violation,level,regime_id,graph,metric,value,count,failures";

std::string format_double(double v);
std::string results_csv(const std::vector<ResultRow>& rows);
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::string& path);

std::string profiles_csv(const std::vector<ProfileEntry>& profiles);
std::vector<ProfileEntry> read_profiles_csv(const std::string& path);

void write_model(const std::string& path, const LinearEnsembleModel& model);
LinearEnsembleModel read_model(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace tcda
