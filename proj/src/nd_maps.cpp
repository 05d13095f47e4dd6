#include "ecl/nd_maps.hpp"

#include <cmath>
#include <cstring>
#include <future>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <json.hpp>

#include "ecl/kernels.hpp"
#include "ecl/quadrature.hpp"

namespace ecl {

namespace {

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t pairing_hash(const char* kind, const CVecX& f, const CVecX& g,
                           std::uint64_t geometry_hash) {
  std::uint64_t h = 14695981039346656037ull;
  h = fnv_bytes(h, kind, std::strlen(kind));
  h = fnv_bytes(h, &geometry_hash, sizeof(geometry_hash));
  if (f.size() > 0) h = fnv_bytes(h, f.data(), sizeof(Complex) * f.size());
  if (g.size() > 0) h = fnv_bytes(h, g.data(), sizeof(Complex) * g.size());
  return h;
}

Complex bilinear(const QuadratureRule& rule, const std::vector<CVec3>& u,
                 const std::vector<CVec3>& v,
                 const std::function<double(const Vec3&)>& weight = nullptr) {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double w = weight ? weight(rule.nodes[i]) : 1.0;
    acc += rule.weights[i] * w * u[i].transpose().dot(v[i]);
  }
  return acc;
}

void require_same_rule(const VolumeField& x, const VolumeField& y, const char* where) {
  if (x.rule.size() != y.rule.size() || rule_hash(x.rule) != rule_hash(y.rule))
    throw ValidationError(std::string(where) + ": fields live on different rules");
}

}  // namespace

UnionRule union_rule(const ClusterGeometry& cluster, const QuadratureRule& rule_B) {
  if (cluster.centers.empty()) throw ValidationError("union_rule: empty cluster");
  if (rule_B.is_boundary())
    throw ValidationError("union_rule: reference rule must be a volume rule");
  UnionRule u;
  u.per_inclusion = rule_B.size();
  u.inclusions = cluster.M();
  u.rule.nodes.reserve(u.per_inclusion * u.inclusions);
  u.rule.weights.reserve(u.per_inclusion * u.inclusions);
  for (const auto& z : cluster.centers) {
    QuadratureRule d = scaled_rule(rule_B, z, cluster.a);
    u.rule.nodes.insert(u.rule.nodes.end(), d.nodes.begin(), d.nodes.end());
    u.rule.weights.insert(u.rule.weights.end(), d.weights.begin(), d.weights.end());
  }
  return u;
}

VolumeField trace_field(Domain domain, const CVecX& f, const QuadratureRule& rule_bdry,
                        const NeumannGreen& green, const QuadratureRule& rule_target) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("trace_field: density rule must be a boundary rule");
  if (f.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("trace_field: density size does not match the rule");

  VolumeField out;
  out.rule = rule_target;
  if (rule_hash(rule_target) == rule_hash(rule_bdry)) {
    // boundary trace of SL_Gamma(f)
    if (green.mode() == GreenMode::Corrected) {
      if (rule_hash(rule_bdry) != rule_hash(green.boundary_rule()))
        throw ValidationError(
            "trace_field: density rule must match the corrected green's "
            "boundary rule");
      out.values = green.neumann_solve(f, rule_target.nodes);
    } else {
      const CVecX u = single_layer_on_surface(rule_bdry, green.background(), 0.0) * f;
      out.values = unpack_field(u);
    }
    return out;
  }
  auto s = background_field(domain, f, rule_bdry, green, rule_target.nodes);
  out.values = std::move(s.values);
  return out;
}

NdPairing pairing_lambda_e(const CVecX& f, const CVecX& g, const NeumannGreen& green,
                           const QuadratureRule& rule_bdry) {
  if (g.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("pairing_lambda_e: density size does not match the rule");
  const VolumeField uf = trace_field(Domain::Cube, f, rule_bdry, green, rule_bdry);
  NdPairing out;
  out.kind = "e";
  out.value = bilinear(rule_bdry, uf.values, unpack_field(g));
  out.inputs_hash = pairing_hash("e", f, g, rule_hash(rule_bdry));
  return out;
}

VolumeField solve_vg(const UnionRule& incl, const FrequencySetting& setting,
                     const DensitySampler& rho, const VolumeField& s_on_d,
                     const NeumannGreen& green) {
  const std::size_t n = incl.rule.size();
  if (n == 0) throw ValidationError("solve_vg: empty union rule");
  if (s_on_d.values.size() != n)
    throw ValidationError("solve_vg: S field does not match the union rule");
  if (!rho) throw ValidationError("solve_vg: density sampler required");

  CMatX K = assemble_newtonian(incl.rule, green.background()).mat;
  if (green.mode() == GreenMode::Corrected) {
    green.prepare_sources(incl.rule.nodes);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        K.block<3, 3>(3 * i, 3 * j) +=
            incl.rule.weights[j] * green.R(incl.rule.nodes[i], incl.rule.nodes[j]);
  }
  const double w2 = setting.omega_sq();
  const double rho1 = setting.rho1();
  for (std::size_t j = 0; j < n; ++j)
    K.middleCols(3 * j, 3) *= w2 * (rho1 - rho(incl.rule.nodes[j]));
  CMatX A = CMatX::Identity(3 * n, 3 * n) - K;

  const CVecX v = A.partialPivLu().solve(s_on_d.packed());
  if (!v.allFinite())
    throw NumericalError("solve_vg: dense solve produced non-finite values");
  VolumeField out;
  out.rule = incl.rule;
  out.values = unpack_field(v);
  return out;
}

NdPairing pairing_lambda_d(const NdPairing& lambda_e, const VolumeField& vg,
                           const VolumeField& uf_on_d, const FrequencySetting& setting,
                           const DensitySampler& rho) {
  require_same_rule(vg, uf_on_d, "pairing_lambda_d");
  if (!rho) throw ValidationError("pairing_lambda_d: density sampler required");
  const double w2 = setting.omega_sq();
  const double rho1 = setting.rho1();
  NdPairing out;
  out.kind = "D";
  out.value = lambda_e.value +
              w2 * bilinear(vg.rule, vg.values, uf_on_d.values,
                            [&](const Vec3& x) { return rho1 - rho(x); });
  out.inputs_hash = pairing_hash("D", CVecX(), CVecX(),
                                 lambda_e.inputs_hash ^ rule_hash(vg.rule));
  return out;
}

NdPairing pairing_lambda_p(const NdPairing& lambda_e, const VolumeField& qg,
                           const VolumeField& uf_on_omega, double p2) {
  require_same_rule(qg, uf_on_omega, "pairing_lambda_p");
  NdPairing out;
  out.kind = "P";
  out.value = lambda_e.value - p2 * bilinear(qg.rule, qg.values, uf_on_omega.values);
  out.inputs_hash = pairing_hash("P", CVecX(), CVecX(),
                                 lambda_e.inputs_hash ^ rule_hash(qg.rule));
  return out;
}

NdAssembly assemble_nd(const NdSetup& setup, const CVecX& f, const CVecX& g) {
  if (!setup.green) throw ValidationError("assemble_nd: green evaluator required");
  if (!setup.rho) throw ValidationError("assemble_nd: density sampler required");
  const NeumannGreen& green = *setup.green;
  if (green.mode() == GreenMode::Corrected &&
      rule_hash(setup.rule_bdry) != rule_hash(green.boundary_rule()))
    throw ValidationError(
        "assemble_nd: boundary rule does not match the corrected green "
        "(experiment mode mismatch)");

  NdAssembly out;
  out.lambda_e = pairing_lambda_e(f, g, green, setup.rule_bdry);

  const UnionRule incl = union_rule(setup.cluster, setup.rule_B);
  out.uf_d = trace_field(setup.domain, f, setup.rule_bdry, green, incl.rule);
  out.uf_omega = trace_field(setup.domain, f, setup.rule_bdry, green, setup.rule_omega);

  VolumeField sg_d = trace_field(setup.domain, g, setup.rule_bdry, green, incl.rule);
  out.vg = solve_vg(incl, setup.setting, setup.rho, sg_d, green);

  VolumeField sg_omega =
      trace_field(setup.domain, g, setup.rule_bdry, green, setup.rule_omega);
  out.qg = solve_continuous_lse(setup.p2, green, setup.rule_omega, sg_omega);

  out.lambda_d = pairing_lambda_d(out.lambda_e, out.vg, out.uf_d, setup.setting,
                                  setup.rho);
  out.lambda_p = pairing_lambda_p(out.lambda_e, out.qg, out.uf_omega, setup.p2);

  const double w2 = setup.setting.omega_sq();
  const double rho1 = setup.setting.rho1();
  out.gap.kind = "gap";
  out.gap.value = w2 * rho1 * bilinear(out.vg.rule, out.vg.values, out.uf_d.values) +
                  setup.p2 * bilinear(out.qg.rule, out.qg.values, out.uf_omega.values) -
                  w2 * bilinear(out.vg.rule, out.vg.values, out.uf_d.values,
                                [&](const Vec3& x) { return setup.rho(x); });
  out.gap.inputs_hash = pairing_hash("gap", f, g, rule_hash(setup.rule_bdry));
  return out;
}

NdPairing nd_gap(const CVecX& f, const CVecX& g, const NdSetup& setup) {
  return assemble_nd(setup, f, g).gap;
}

namespace {

// least-squares slope of log|J| against log a over the usable points
std::pair<double, double> loglog_fit(const std::vector<double>& a,
                                     const std::vector<double>& j) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (j[i] > 0.0 && std::isfinite(j[i])) {
      x.push_back(std::log(a[i]));
      y.push_back(std::log(j[i]));
    }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() < 2) return {nan, nan};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-30) return {nan, nan};
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace

ConvergenceStudy convergence_study(const std::vector<NdSetup>& sweep, const CVecX& f,
                                   const CVecX& g) {
  if (sweep.size() < 3)
    throw ValidationError("convergence_study: at least 3 sweep points required");

  std::vector<std::future<NdPairing>> jobs;
  jobs.reserve(sweep.size());
  for (const auto& setup : sweep)
    jobs.push_back(std::async(std::launch::async,
                              [&setup, &f, &g] { return nd_gap(f, g, setup); }));

  ConvergenceStudy study;
  std::vector<double> as, js;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    ConvergencePoint pt;
    pt.a = sweep[i].cluster.a;
    pt.M = sweep[i].cluster.M();
    pt.p2 = sweep[i].p2;
    pt.j_abs = std::abs(jobs[i].get().value);
    as.push_back(pt.a);
    js.push_back(pt.j_abs);
    pt.exponent_running = loglog_fit(as, js).first;
    study.points.push_back(pt);
  }
  const auto [slope, intercept] = loglog_fit(as, js);
  study.slope = slope;
  study.intercept = intercept;
  const double h = sweep.front().setting.h;
  const double eps = 0.1;
  study.reference_slope = (1.0 - h) * (9.0 - 5.0 * eps) / (18.0 * (3.0 - eps));
  return study;
}

std::string study_csv(const ConvergenceStudy& study) {
  std::ostringstream os;
  os.precision(12);
  os << "a,M,P2,J_abs,exponent_running\n";
  for (const auto& pt : study.points)
    os << pt.a << "," << pt.M << "," << pt.p2 << "," << pt.j_abs << ","
       << pt.exponent_running << "\n";
  return os.str();
}

std::string study_json(const ConvergenceStudy& study) {
  nlohmann::json j;
  j["slope"] = study.slope;
  j["intercept"] = study.intercept;
  j["reference_slope"] = study.reference_slope;
  return j.dump(2);
}

}  // namespace ecl
