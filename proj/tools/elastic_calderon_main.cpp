// elastic-calderon: batch experiment driver over the C API.
//   run <config.json> [--out DIR] [--threads N]
//   validate <config.json>
//   show <run-dir>
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "elastic_calderon.h"

namespace {

int usage() {
  std::fprintf(stderr,
               "usage: elastic-calderon run <config.json> [--out DIR] [--threads N]\n"
               "       elastic-calderon validate <config.json>\n"
               "       elastic-calderon show <run-dir>\n"
               "(version %s)\n",
               ecl_version());
  return ECL_VALIDATION_ERROR;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::ostringstream buf;
  buf << is.rdbuf();
  out = buf.str();
  return true;
}

int fail(ecl_status status, const char* what) {
  std::fprintf(stderr, "%s: %s\n", what, ecl_last_error());
  return status;
}

int cmd_validate(const std::string& path) {
  std::string text;
  if (!read_file(path, text)) {
    std::fprintf(stderr, "cannot read config '%s'\n", path.c_str());
    return ECL_VALIDATION_ERROR;
  }
  char* diagnostics = nullptr;
  const ecl_status status = ecl_validate(text.c_str(), &diagnostics);
  if (status == ECL_OK) {
    std::printf("ok\n");
    return 0;
  }
  if (diagnostics) {
    std::fputs(diagnostics, stderr);
    ecl_string_free(diagnostics);
    return status;
  }
  return fail(status, "validate");
}

int cmd_run(int argc, char** argv) {
  std::string config_path, out_dir = "ecl-out";
  int threads = 0;
  if (const char* root = std::getenv("ECL_OUTPUT_ROOT"))
    out_dir = std::string(root) + "/ecl-out";
  bool out_set = false;
  for (int i = 0; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      out_dir = argv[++i];
      out_set = true;
    } else if (arg == "--threads" && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else if (config_path.empty() && arg.rfind("--", 0) != 0) {
      config_path = arg;
    } else {
      return usage();
    }
  }
  (void)out_set;
  if (config_path.empty()) return usage();

  std::string text;
  if (!read_file(config_path, text)) {
    std::fprintf(stderr, "cannot read config '%s'\n", config_path.c_str());
    return ECL_VALIDATION_ERROR;
  }
  ecl_experiment* handle = nullptr;
  ecl_status status = ecl_experiment_load(text.c_str(), &handle);
  if (status != ECL_OK) return fail(status, "load");

  char* result = nullptr;
  status = ecl_experiment_run(handle, out_dir.c_str(), threads, &result);
  ecl_experiment_free(handle);
  if (status != ECL_OK) return fail(status, "run");
  std::printf("wrote %s\n", out_dir.c_str());
  if (result) {
    std::fputs(result, stdout);
    ecl_string_free(result);
  }
  return 0;
}

int cmd_show(const std::string& dir) {
  char* text = nullptr;
  const ecl_status status = ecl_show_bundle(dir.c_str(), &text);
  if (status != ECL_OK) return fail(status, "show");
  std::fputs(text, stdout);
  ecl_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) return usage();
  const std::string cmd = argv[1];
  if (cmd == "run") return cmd_run(argc - 2, argv + 2);
  if (cmd == "validate") return cmd_validate(argv[2]);
  if (cmd == "show") return cmd_show(argv[2]);
  return usage();
}
