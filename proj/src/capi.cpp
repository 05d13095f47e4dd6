#include "elastic_calderon.h"

#include <cstring>
#include <new>
#include <string>

#include "ecl/errors.hpp"
#include "ecl/experiment.hpp"

struct ecl_experiment {
  ecl::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs the body, translating module exceptions to status codes.
template <typename Fn>
ecl_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return ECL_OK;
  } catch (const ecl::NumericalError& e) {
    g_last_error = e.what();
    return ECL_NUMERICAL_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ECL_NUMERICAL_ERROR;
  } catch (const std::exception& e) {  // ValidationError, IO, parse
    g_last_error = e.what();
    return ECL_VALIDATION_ERROR;
  }
}

}  // namespace

extern "C" {

const char* ecl_version(void) { return "0.1.0"; }

const char* ecl_last_error(void) { return g_last_error.c_str(); }

void ecl_string_free(char* s) { delete[] s; }

ecl_status ecl_experiment_load(const char* config_json, ecl_experiment** out) {
  if (!config_json || !out) {
    g_last_error = "ecl_experiment_load: null argument";
    return ECL_VALIDATION_ERROR;
  }
  *out = nullptr;
  return guarded([&] {
    auto cfg = ecl::ExperimentConfig::from_json_text(config_json);
    *out = new ecl_experiment{std::move(cfg)};
  });
}

void ecl_experiment_free(ecl_experiment* handle) { delete handle; }

ecl_status ecl_validate(const char* config_json, char** out_diagnostics) {
  if (!config_json || !out_diagnostics) {
    g_last_error = "ecl_validate: null argument";
    return ECL_VALIDATION_ERROR;
  }
  *out_diagnostics = nullptr;
  return guarded([&] {
    const auto diags = ecl::validate_config_text(config_json);
    if (diags.empty()) return;
    std::string report;
    for (const auto& d : diags) {
      report += d;
      report += '\n';
    }
    *out_diagnostics = dup_string(report);
    throw ecl::ValidationError(report);
  });
}

ecl_status ecl_experiment_run(const ecl_experiment* handle, const char* out_dir,
                              int threads, char** out_result_json) {
  if (!handle || !out_dir) {
    g_last_error = "ecl_experiment_run: null argument";
    return ECL_VALIDATION_ERROR;
  }
  if (out_result_json) *out_result_json = nullptr;
  return guarded([&] {
    const std::string result = ecl::run_experiment(handle->cfg, out_dir, threads);
    if (out_result_json) *out_result_json = dup_string(result);
  });
}

ecl_status ecl_show_bundle(const char* run_dir, char** out_text) {
  if (!run_dir || !out_text) {
    g_last_error = "ecl_show_bundle: null argument";
    return ECL_VALIDATION_ERROR;
  }
  *out_text = nullptr;
  return guarded([&] { *out_text = dup_string(ecl::show_bundle(run_dir)); });
}

}  // extern "C"
