#include "tcda/tcda.h"

#include <cstdio>
#include <memory>
#include <new>
#include <string>

#include "tcda/commands.hpp"
#include "tcda/error.hpp"
#include "tcda/io.hpp"
#include "tcda/metrics.hpp"
#include "tcda/store.hpp"

struct tcda_options {
  tcda::RunOptions run;
};

struct tcda_tensor {
  tcda::TensorData data;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_summary;

template <class Fn>
tcda_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TCDA_OK;
  } catch (const tcda::Error& e) {
    g_last_error = e.what();
    return static_cast<tcda_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return TCDA_E_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw tcda::Error(tcda::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

tcda::RunOptions run_of(const tcda_options* opts) { return opts ? opts->run : tcda::RunOptions{}; }

template <class Cmd>
tcda_status command(Cmd cmd, const tcda_options* opts, const char* config) {
  return guarded([&] {
    require(config, "config");
    g_last_summary = cmd(config, run_of(opts));
  });
}

}  // namespace

extern "C" {

const char* tcda_version(void) { return "1.0.0"; }
const char* tcda_last_error(void) { return g_last_error.c_str(); }
const char* tcda_last_summary(void) { return g_last_summary.c_str(); }

tcda_options* tcda_options_create(void) { return new (std::nothrow) tcda_options(); }
void tcda_options_free(tcda_options* opts) { delete opts; }

tcda_status tcda_options_set_seed(tcda_options* opts, uint64_t seed) {
  return guarded([&] {
    require(opts, "options");
    opts->run.seed = seed;
  });
}

tcda_status tcda_options_set_jobs(tcda_options* opts, int jobs) {
  return guarded([&] {
    require(opts, "options");
    if (jobs < 0) throw tcda::Error(tcda::ErrorCode::invalid_argument, "jobs must be >= 0");
    opts->run.jobs = jobs;
  });
}

tcda_status tcda_options_set_schedule_variant(tcda_options* opts, const char* variant) {
  return guarded([&] {
    require(opts, "options");
    require(variant, "variant");
    opts->run.variant = tcda::parse_schedule_variant(variant);
  });
}

tcda_status tcda_options_set_exogenous_path(tcda_options* opts, const char* path) {
  return guarded([&] {
    require(opts, "options");
    require(path, "path");
    opts->run.exogenous_path = std::string(path);
  });
}

tcda_status tcda_generate(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_generate, opts, config_json);
}
tcda_status tcda_evaluate(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_evaluate, opts, config_json);
}
tcda_status tcda_aggregate(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_aggregate, opts, config_json);
}
tcda_status tcda_ensemble_train(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_ensemble_train, opts, config_json);
}
tcda_status tcda_ensemble_apply(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_ensemble_apply, opts, config_json);
}
tcda_status tcda_report(const tcda_options* opts, const char* config_json) {
  return command(tcda::cmd_report, opts, config_json);
}

tcda_status tcda_registry_dump(const tcda_options* opts, const char* out_path) {
  return guarded([&] {
    const auto run = run_of(opts);
    const std::string csv = tcda::registry_csv(run.variant.value_or(tcda::ScheduleVariant::table));
    if (out_path == nullptr || std::string(out_path) == "-") {
      std::fwrite(csv.data(), 1, csv.size(), stdout);
      std::fflush(stdout);
      g_last_summary.clear();
    } else {
      tcda::write_text(out_path, csv);
      g_last_summary = "wrote registry to " + std::string(out_path);
    }
  });
}

tcda_status tcda_metric(const char* metric, const double* scores, const double* truth, size_t n, double* out) {
  return guarded([&] {
    require(metric, "metric");
    require(scores, "scores");
    require(truth, "truth");
    require(out, "out");
    *out = tcda::compute_metric(tcda::parse_metric(metric), {scores, n}, {truth, n});
  });
}

tcda_status tcda_tensor_create(uint32_t rank, const uint32_t* dims, const double* values, tcda_tensor** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (rank == 0) throw tcda::Error(tcda::ErrorCode::format, "tensor needs rank >= 1");
    require(dims, "dims");
    auto t = std::make_unique<tcda_tensor>();
    t->data.dims.assign(dims, dims + rank);
    std::size_t n = 1;
    for (auto d : t->data.dims) n *= d;
    if (n > 0) require(values, "values");
    t->data.values.assign(values, values + n);
    *out = t.release();
  });
}

tcda_status tcda_tensor_read(const char* path, tcda_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto t = std::make_unique<tcda_tensor>();
    t->data = tcda::read_tensor(path);
    *out = t.release();
  });
}

tcda_status tcda_tensor_write(const tcda_tensor* t, const char* path) {
  return guarded([&] {
    require(t, "tensor");
    require(path, "path");
    tcda::write_tensor(path, t->data);
  });
}

uint32_t tcda_tensor_rank(const tcda_tensor* t) { return t ? static_cast<uint32_t>(t->data.dims.size()) : 0; }
const uint32_t* tcda_tensor_dims(const tcda_tensor* t) { return t ? t->data.dims.data() : nullptr; }
const double* tcda_tensor_data(const tcda_tensor* t) { return t ? t->data.values.data() : nullptr; }
size_t tcda_tensor_size(const tcda_tensor* t) { return t ? t->data.values.size() : 0; }
void tcda_tensor_free(tcda_tensor* t) { delete t; }

}  // extern "C"
