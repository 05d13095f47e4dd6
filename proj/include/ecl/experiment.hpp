#pragma once

#include <string>
#include <vector>

#include "ecl/geometry.hpp"
#include "ecl/potentials.hpp"

namespace ecl {

// ---------------------------------------------------------------------------
// Configuration-driven orchestration of the canonical experiments. One JSON
// document in, one reproducible run directory out.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string experiment;  // spectrum | effective | nd_convergence | reconstruct
  Domain domain = Domain::Cube;
  ElasticBackground bg{1.0, 1.0, 1.0};
  double h = 0.5;
  std::vector<double> a_list;
  int n0 = 0;
  double c_n0 = -1.0;
  double rho_tilde1 = 1.0;
  int lattice_cut = 2;
  double iota = 1.0;
  double p2_override = 0.0;  // <= 0 means "derive from the tuning"
  int res_vol = 5;
  int res_bdry = 6;
  int res_inclusion = 3;
  long seed = 0;
  GreenMode green_mode = GreenMode::FreeSpace;
  int threads = 0;

  // Parses and fully validates; throws ValidationError listing every violated
  // precondition (parse errors include line and column).
  static ExperimentConfig from_json_text(const std::string& text);

  // Canonical echo (sorted keys, round-trip doubles): the determinism anchor.
  std::string to_json() const;
};

// All violated preconditions without computing anything; empty means clean.
// Parse failures produce a single diagnostic with line/column.
std::vector<std::string> validate_config_text(const std::string& text);

// Runs the experiment, writes the bundle (config.json, result.json, CSV
// tables, field exports) under out_dir and returns the result JSON text.
// On any error the partial bundle is removed and the module error rethrown.
std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           int threads_override = 0);

// Pretty-print an existing run bundle.
std::string show_bundle(const std::string& run_dir);

}  // namespace ecl
