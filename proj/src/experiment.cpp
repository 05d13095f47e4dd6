#include "ecl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ecl/cgo.hpp"
#include "ecl/errors.hpp"
#include "ecl/nd_maps.hpp"
#include "ecl/quadrature.hpp"
#include "ecl/resonance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ecl {

namespace {

// The canonical boundary data family shared by the N-D experiments.
CVec3 data_f(const Vec3& y) {
  return CVec3(std::sin(y[0] + 0.3) + 0.2 * y[1], std::cos(y[1] * y[2]),
               0.5 * y[2] + std::sin(0.7 * y[0] * y[1]));
}

CVec3 data_g(const Vec3& y) {
  return CVec3(0.4 * y[1] * y[2] + 0.1, std::sin(0.9 * y[0] - y[2]),
               std::cos(y[0] + 0.4 * y[1]));
}

CVecX sampled(const QuadratureRule& bdry, CVec3 (*fn)(const Vec3&)) {
  CVecX v(3 * bdry.size());
  for (std::size_t i = 0; i < bdry.size(); ++i) v.segment<3>(3 * i) = fn(bdry.nodes[i]);
  return v;
}

double canonical_rho(const Vec3& x) { return 1.0 + 0.3 * std::cos(2.0 * M_PI * x[0]); }

void line_column(const std::string& text, std::size_t byte, std::size_t& line,
                 std::size_t& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

json prov(double value, const char* op) {
  if (std::isnan(value)) return json{{"value", nullptr}, {"op", op}};
  return json{{"value", value}, {"op", op}};
}

json prov(const std::vector<double>& values, const char* op) {
  return json{{"value", values}, {"op", op}};
}

// Pulls a numeric/integer/string field if present, appending a diagnostic on
// type mismatch; tracks consumed keys so leftovers can be reported.
struct Section {
  const json& j;
  std::string prefix;
  std::vector<std::string>& diags;
  std::set<std::string> seen;

  bool has(const char* key) { return j.contains(key); }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j.contains(key)) return;
    seen.insert(key);
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      diags.push_back(prefix + key + ": wrong type");
    }
  }

  void finish() {
    for (const auto& [key, _] : j.items())
      if (!seen.count(key)) diags.push_back("unknown config key '" + prefix + key + "'");
  }
};

std::vector<std::string> parse_and_validate(const std::string& text, ExperimentConfig* out) {
  std::vector<std::string> diags;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    line_column(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
    std::ostringstream os;
    os << "parse error at line " << line << ", column " << col << ": " << e.what();
    return {os.str()};
  }
  if (!j.is_object()) return {"config must be a JSON object"};

  ExperimentConfig cfg;
  Section top{j, "", diags};

  std::string experiment, domain = "cube", green = "free_space";
  top.get("experiment", experiment);
  top.get("domain", domain);
  top.get("green_mode", green);
  long seed = 0;
  int threads = 0;
  top.get("seed", seed);
  top.get("threads", threads);
  top.seen.insert({"bg", "cluster", "tuning", "cgo", "resolution"});
  top.finish();

  if (experiment.empty()) {
    diags.push_back("missing required field 'experiment'");
  } else if (experiment != "spectrum" && experiment != "effective" &&
             experiment != "nd_convergence" && experiment != "reconstruct") {
    diags.push_back("experiment = '" + experiment +
                    "' is not one of spectrum|effective|nd_convergence|reconstruct");
  }
  cfg.experiment = experiment;

  try {
    cfg.domain = domain_from_string(domain);
  } catch (const ValidationError& e) {
    diags.push_back(e.what());
  }
  if (green == "free_space") {
    cfg.green_mode = GreenMode::FreeSpace;
  } else if (green == "corrected") {
    cfg.green_mode = GreenMode::Corrected;
  } else {
    diags.push_back("green_mode = '" + green + "' is not one of free_space|corrected");
  }
  if (seed < 0) diags.push_back("seed must be >= 0");
  if (threads < 0) diags.push_back("threads must be >= 0");
  cfg.seed = seed;
  cfg.threads = threads;

  double lambda = 1.0, mu = 1.0, rho0 = 1.0;
  if (j.contains("bg")) {
    Section s{j.at("bg"), "bg.", diags};
    s.get("lambda", lambda);
    s.get("mu", mu);
    s.get("rho0", rho0);
    s.finish();
  }
  if (!(mu > 0.0)) diags.push_back("bg.mu must be > 0");
  if (!(3.0 * lambda + 2.0 * mu > 0.0)) diags.push_back("bg: 3*lambda + 2*mu must be > 0");
  if (!(rho0 > 0.0)) diags.push_back("bg.rho0 must be > 0");
  if (diags.empty()) cfg.bg = ElasticBackground(lambda, mu, rho0);

  if (j.contains("cluster")) {
    Section s{j.at("cluster"), "cluster.", diags};
    s.get("h", cfg.h);
    s.get("a_list", cfg.a_list);
    s.finish();
  }
  if (!(cfg.h > 1.0 / 3.0 && cfg.h < 1.0)) {
    std::ostringstream os;
    os << "h = " << cfg.h << " violates the admissible range 1/3 < h < 1";
    diags.push_back(os.str());
  }
  for (double a : cfg.a_list)
    if (!(a > 0.0 && a < 1.0)) {
      std::ostringstream os;
      os << "cluster.a_list entry " << a << " must lie in (0, 1)";
      diags.push_back(os.str());
    }

  if (j.contains("tuning")) {
    Section s{j.at("tuning"), "tuning.", diags};
    s.get("n0", cfg.n0);
    s.get("c_n0", cfg.c_n0);
    s.get("rho_tilde1", cfg.rho_tilde1);
    s.finish();
  }
  if (cfg.n0 < 0) diags.push_back("tuning.n0 must be >= 0");
  if (!(cfg.c_n0 < 0.0)) {
    std::ostringstream os;
    os << "c_n0 = " << cfg.c_n0 << " violates the sign condition: c_n0 is a negative constant";
    diags.push_back(os.str());
  }
  if (!(cfg.rho_tilde1 > 0.0)) diags.push_back("tuning.rho_tilde1 must be > 0");

  if (j.contains("cgo")) {
    Section s{j.at("cgo"), "cgo.", diags};
    s.get("lattice_cut", cfg.lattice_cut);
    s.get("iota", cfg.iota);
    bool has_override = s.has("p2_override");
    s.get("p2_override", cfg.p2_override);
    if (has_override && !(cfg.p2_override > 0.0))
      diags.push_back("cgo.p2_override must be > 0 when present");
    s.finish();
  }
  if (cfg.lattice_cut < 1) diags.push_back("cgo.lattice_cut must be >= 1");
  if (!(cfg.iota > 0.0)) diags.push_back("cgo.iota must be > 0");

  if (j.contains("resolution")) {
    Section s{j.at("resolution"), "resolution.", diags};
    s.get("vol", cfg.res_vol);
    s.get("bdry", cfg.res_bdry);
    s.get("inclusion", cfg.res_inclusion);
    s.finish();
  }
  if (cfg.res_vol < 1) diags.push_back("resolution.vol must be >= 1");
  if (cfg.res_bdry < 1) diags.push_back("resolution.bdry must be >= 1");
  if (cfg.res_inclusion < 1) diags.push_back("resolution.inclusion must be >= 1");

  if (experiment == "nd_convergence") {
    if (cfg.a_list.size() < 3)
      diags.push_back("nd_convergence: cluster.a_list — need >= 3 points for an exponent fit");
    if (cfg.domain != Domain::Cube)
      diags.push_back("nd_convergence requires domain = cube (exact-tiling lattices)");
    for (double a : cfg.a_list) {
      if (!(a > 0.0 && a < 1.0)) continue;
      const double d = std::pow(a, (1.0 - cfg.h) / 3.0);
      const double n = std::round(1.0 / d);
      if (std::abs(n * d - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "nd_convergence: a = " << a << " does not tile the cube (cell edge " << d
           << " must divide 1 exactly)";
        diags.push_back(os.str());
      }
    }
  }
  if (experiment == "effective" && cfg.a_list.size() < 2)
    diags.push_back("effective: cluster.a_list — need >= 2 points for the slope fit");
  if (experiment == "reconstruct" && cfg.domain != Domain::Cube)
    diags.push_back("reconstruct requires domain = cube (the period cell of the Fourier basis)");

  if (out && diags.empty()) *out = cfg;
  return diags;
}

// ---------------------------------------------------------------------------
// Experiment bodies. Each fills result["results"] and emits CSV tables via the
// writer callback (single-threaded output).
// ---------------------------------------------------------------------------

using Writer = std::function<void(const std::string&, const std::string&)>;

void run_spectrum(const ExperimentConfig& cfg, json& results, const Writer& emit) {
  const auto rule_B = inclusion_quadrature(Shape::Ball, cfg.res_inclusion);
  const auto spec = newton_spectrum(rule_B, cfg.bg, 8);
  std::vector<double> lambdas(spec.eigenvalues.data(), spec.eigenvalues.data() + 8);
  std::vector<double> couplings(spec.coupling.data(), spec.coupling.data() + 8);
  results["lambda"] = prov(lambdas, "newton_spectrum");
  results["coupling"] = prov(couplings, "newton_spectrum");
  results["cluster_coupling_n0"] = prov(cluster_coupling(spec, cfg.n0), "cluster_coupling");

  std::ostringstream csv;
  csv.precision(17);
  csv << "n,lambda,coupling\n";
  for (int n = 0; n < 8; ++n)
    csv << n + 1 << "," << lambdas[n] << "," << couplings[n] << "\n";
  emit("spectrum.csv", csv.str());
}

void run_effective(const ExperimentConfig& cfg, json& results, const Writer& emit) {
  const auto rule_B = inclusion_quadrature(Shape::Ball, cfg.res_inclusion);
  const auto spec = newton_spectrum(rule_B, cfg.bg, std::max(8, cfg.n0 + 4));
  const double p2 = effective_p2(spec, cfg.n0, cfg.c_n0);

  std::ostringstream csv;
  csv.precision(17);
  csv << "a,omega_sq,alpha,reference\n";
  double sxx = 0.0, sxy = 0.0;
  std::vector<double> alphas;
  for (double a : cfg.a_list) {
    const auto setting = tune_frequency(spec, cfg.n0, cfg.c_n0, a, cfg.h, cfg.rho_tilde1);
    const auto w = solve_w(scaled_rule(rule_B, Vec3::Zero(), a), setting, cfg.bg);
    const double alpha = scattering_alpha(w);
    const double x = std::pow(a, 1.0 - cfg.h);
    sxx += x * x;
    sxy += x * alpha;
    alphas.push_back(alpha);
    csv << a << "," << setting.omega_sq() << "," << alpha << "," << -p2 * x << "\n";
  }
  const double slope = sxy / sxx;  // fit alpha = slope * a^{1-h} through the origin
  results["p2"] = prov(p2, "effective_p2");
  results["alpha"] = prov(alphas, "scattering_alpha");
  results["alpha_slope"] = prov(slope, "least_squares_fit");
  results["slope_over_minus_p2"] = prov(-slope / p2, "least_squares_fit");
  emit("alpha.csv", csv.str());
}

// Exact-tiling cubic lattice for one sweep point: n^3 cells of edge d = 1/n,
// every cell retained (the collar clearance kappa = d/2 holds by construction).
ClusterGeometry tiling_lattice(double a, double h) {
  ClusterGeometry cg;
  cg.domain = Domain::Cube;
  cg.h = h;
  cg.a = a;
  cg.d = std::pow(a, (1.0 - h) / 3.0);
  const int n = static_cast<int>(std::round(1.0 / cg.d));
  cg.cell_volume = cg.d * cg.d * cg.d;
  cg.kappa = 0.5 * cg.d;
  const double orig = -0.5 + 0.5 * cg.d;
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k)
        cg.centers.push_back(Vec3(orig + i * cg.d, orig + jj * cg.d, orig + k * cg.d));
  return cg;
}

void run_nd_convergence(const ExperimentConfig& cfg, json& results, const Writer& emit) {
  const auto rule_B = inclusion_quadrature(Shape::Ball, cfg.res_inclusion);
  const auto spec = newton_spectrum(rule_B, cfg.bg, std::max(8, cfg.n0 + 4));
  const double p2 = effective_p2(spec, cfg.n0, cfg.c_n0);
  const auto bdry = boundary_quadrature(Domain::Cube, cfg.res_bdry);
  const auto omega_rule = domain_volume_rule(Domain::Cube, cfg.res_vol);

  std::vector<double> a_sorted = cfg.a_list;
  std::sort(a_sorted.begin(), a_sorted.end(), std::greater<double>());

  std::vector<NdSetup> sweep;
  auto fs_green = std::make_shared<NeumannGreen>(cfg.bg, GreenMode::FreeSpace);
  for (double a : a_sorted) {
    NdSetup s;
    s.domain = Domain::Cube;
    s.cluster = tiling_lattice(a, cfg.h);
    s.setting = tune_frequency(spec, cfg.n0, cfg.c_n0, a, cfg.h, cfg.rho_tilde1);
    s.p2 = p2;
    s.rho = canonical_rho;
    s.rule_B = rule_B;
    s.rule_bdry = bdry;
    s.rule_omega = omega_rule;
    s.green = cfg.green_mode == GreenMode::FreeSpace
                  ? fs_green
                  : std::make_shared<NeumannGreen>(omega_rule, bdry, cfg.bg, canonical_rho,
                                                   s.setting.omega());
    sweep.push_back(std::move(s));
  }

  const CVecX f = sampled(bdry, data_f);
  const CVecX g = sampled(bdry, data_g);
  const auto study = convergence_study(sweep, f, g);

  std::vector<double> j_abs;
  for (const auto& pt : study.points) j_abs.push_back(pt.j_abs);
  results["j_abs"] = prov(j_abs, "nd_gap");
  results["slope"] = prov(study.slope, "convergence_study");
  results["intercept"] = prov(study.intercept, "convergence_study");
  results["reference_slope"] = prov(study.reference_slope, "convergence_study");
  emit("nd_convergence.csv", study_csv(study));
  emit("nd_fit.json", study_json(study) + "\n");
}

void run_reconstruct(const ExperimentConfig& cfg, json& results, const Writer& emit) {
  const double p2 = cfg.p2_override > 0.0 ? cfg.p2_override : 10.0;
  const auto vol = domain_volume_rule(Domain::Cube, cfg.res_vol);

  FourierData data;
  for (int i = -cfg.lattice_cut; i <= cfg.lattice_cut; ++i)
    for (int jj = -cfg.lattice_cut; jj <= cfg.lattice_cut; ++jj)
      for (int k = -cfg.lattice_cut; k <= cfg.lattice_cut; ++k) {
        if (i == 0 && jj == 0 && k == 0) continue;
        const auto pair = make_cgo_pair(2.0 * M_PI * Vec3(i, jj, k), p2, cfg.bg,
                                        CgoVariant::Remark, cfg.iota);
        data[{i, jj, k}] =
            fourier_datum_volume_oracle(pair, canonical_rho, vol) / cgo_divisor(pair);
      }

  const auto rec = reconstruct_density(data, cfg.lattice_cut, vol);
  const double err = reconstruction_error(rec, canonical_rho);
  double mean = 0.0;
  for (std::size_t v = 0; v < vol.size(); ++v)
    mean += vol.weights[v] * canonical_rho(vol.nodes[v]);
  mean /= vol.total_weight();

  results["p2"] = prov(p2, cfg.p2_override > 0.0 ? "config_override" : "default");
  results["rel_l2_error"] = prov(err, "reconstruction_error");
  results["mean_rho"] = prov(mean, "quadrature_mean");
  results["truncation_error_estimate"] =
      prov(rec.truncation_error_estimate, "reconstruct_density");
  emit("fourier_data.csv", fourier_data_csv(data));

  std::ostringstream csv;
  csv.precision(17);
  csv << "x1,x2,x3,rho_synth_re,rho_synth_im,rho_truth_minus_mean\n";
  for (std::size_t v = 0; v < vol.size(); ++v) {
    const Vec3& x = vol.nodes[v];
    csv << x[0] << "," << x[1] << "," << x[2] << "," << rec.synthesized.values[v][0].real()
        << "," << rec.synthesized.values[v][0].imag() << "," << canonical_rho(x) - mean
        << "\n";
  }
  emit("synthesized.csv", csv.str());
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ExperimentConfig cfg;
  auto diags = parse_and_validate(text, &cfg);
  if (!diags.empty()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& d : diags) os << "\n  - " << d;
    throw ValidationError(os.str());
  }
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["domain"] = to_string(domain);
  j["bg"] = {{"lambda", bg.lambda}, {"mu", bg.mu}, {"rho0", bg.rho0}};
  j["cluster"] = {{"h", h}, {"a_list", a_list}};
  j["tuning"] = {{"n0", n0}, {"c_n0", c_n0}, {"rho_tilde1", rho_tilde1}};
  json cgo = {{"lattice_cut", lattice_cut}, {"iota", iota}};
  if (p2_override > 0.0) cgo["p2_override"] = p2_override;
  j["cgo"] = cgo;
  j["resolution"] = {{"vol", res_vol}, {"bdry", res_bdry}, {"inclusion", res_inclusion}};
  j["seed"] = seed;
  j["green_mode"] = green_mode == GreenMode::FreeSpace ? "free_space" : "corrected";
  j["threads"] = threads;
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_config_text(const std::string& text) {
  return parse_and_validate(text, nullptr);
}

std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           int threads_override) {
  if (cfg.experiment.empty())
    throw ValidationError("run_experiment: config carries no experiment name");
  const int threads = threads_override > 0 ? threads_override : cfg.threads;
  if (threads > 0) Eigen::setNbThreads(threads);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ValidationError("run_experiment: cannot create output directory '" + out_dir + "'");

  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ValidationError("run_experiment: cannot write '" + p.string() + "'");
    os << text;
    written.push_back(p);
  };

  try {
    emit("config.json", cfg.to_json());

    json result;
    result["schema"] = "ecl-1";
    result["experiment"] = cfg.experiment;
    result["seed"] = cfg.seed;
    json results = json::object();
    if (cfg.experiment == "spectrum") {
      run_spectrum(cfg, results, emit);
    } else if (cfg.experiment == "effective") {
      run_effective(cfg, results, emit);
    } else if (cfg.experiment == "nd_convergence") {
      run_nd_convergence(cfg, results, emit);
    } else if (cfg.experiment == "reconstruct") {
      run_reconstruct(cfg, results, emit);
    } else {
      throw ValidationError("run_experiment: unknown experiment '" + cfg.experiment + "'");
    }
    result["results"] = results;

    const std::string text = result.dump(2) + "\n";
    emit("result.json", text);
    return text;
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    fs::remove(dir, ec);  // only succeeds if now empty
    throw;
  }
}

std::string show_bundle(const std::string& run_dir) {
  const fs::path dir(run_dir);
  std::ifstream is(dir / "result.json", std::ios::binary);
  if (!is)
    throw ValidationError("show_bundle: '" + run_dir + "' is not a run bundle (no result.json)");
  json result;
  try {
    result = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("show_bundle: corrupt result.json: ") + e.what());
  }

  std::ostringstream os;
  os << "experiment: " << result.value("experiment", std::string("?")) << "\n";
  os << "schema:     " << result.value("schema", std::string("?")) << "\n";
  os << "seed:       " << result.value("seed", 0L) << "\n";
  if (result.contains("results")) {
    os << "results:\n";
    for (const auto& [key, leaf] : result.at("results").items()) {
      os << "  " << key << " = ";
      if (leaf.is_object() && leaf.contains("value")) {
        os << leaf.at("value").dump() << "   [" << leaf.value("op", std::string("?")) << "]";
      } else {
        os << leaf.dump();
      }
      os << "\n";
    }
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    files.push_back(entry.path().filename().string());
  std::sort(files.begin(), files.end());
  os << "files:\n";
  for (const auto& f : files) os << "  " << f << "\n";
  return os.str();
}

}  // namespace ecl
