#pragma once

#include "ecl/foldy_lax.hpp"
#include "ecl/resonance.hpp"

namespace ecl {

// ---------------------------------------------------------------------------
// The three N-D pairings <Lambda_e f; g>, <Lambda_D f; g>, <Lambda_P f; g>
// and the gap functional J = <(Lambda_D - Lambda_P) f; g>. All pairings are
// bilinear quadrature sums over shared rules; Lambda_D and Lambda_P reuse the
// exact difference identities against Lambda_e so that no inconsistent
// boundary discretizations enter the gap.
// ---------------------------------------------------------------------------

struct NdPairing {
  Complex value{0.0, 0.0};
  std::string kind;  // "e", "D", "P" or "gap"
  std::uint64_t inputs_hash = 0;
};

// Concatenation of the reference rule dilated onto every inclusion D_m.
struct UnionRule {
  QuadratureRule rule;
  std::size_t per_inclusion = 0;
  std::size_t inclusions = 0;

  std::size_t offset(std::size_t m) const { return m * per_inclusion; }
};

UnionRule union_rule(const ClusterGeometry& cluster, const QuadratureRule& rule_B);

// u^f = SL_Gamma(f) sampled on a target rule (free-space: plain single-layer
// sum; corrected: interior Neumann solve with data f). Targets may include
// boundary nodes of the corrected green's own rule (solved trace).
VolumeField trace_field(Domain domain, const CVecX& f, const QuadratureRule& rule_bdry,
                        const NeumannGreen& green, const QuadratureRule& rule_target);

// <Lambda_e f; g> = sum_i w_i u^f(y_i) . g(y_i) on the boundary rule.
NdPairing pairing_lambda_e(const CVecX& f, const CVecX& g, const NeumannGreen& green,
                           const QuadratureRule& rule_bdry);

// v^g on the union rule: v - w^2 int_D Gamma(.,y) (rho1 - rho(y)) v(y) dy = S,
// one dense block solve over all inclusion nodes. s_on_d carries S = SL(g)
// restricted to the union rule. The FrequencySetting must be tuned against
// the Newtonian spectrum of the *same* reference rule used to build the
// union rule, so that the discrete resolvent gap matches c_{n0} a^h.
VolumeField solve_vg(const UnionRule& incl, const FrequencySetting& setting,
                     const DensitySampler& rho, const VolumeField& s_on_d,
                     const NeumannGreen& green);

// <Lambda_D f; g> = <Lambda_e f; g> + w^2 <(rho1 - rho) v^g; u^f>_{L2(D)}.
NdPairing pairing_lambda_d(const NdPairing& lambda_e, const VolumeField& vg,
                           const VolumeField& uf_on_d, const FrequencySetting& setting,
                           const DensitySampler& rho);

// <Lambda_P f; g> = <Lambda_e f; g> - P^2 <q^g; u^f>_{L2(Omega)}.
NdPairing pairing_lambda_p(const NdPairing& lambda_e, const VolumeField& qg,
                           const VolumeField& uf_on_omega, double p2);

// Full experiment state for one sweep point.
struct NdSetup {
  Domain domain = Domain::Cube;
  ClusterGeometry cluster;
  FrequencySetting setting;
  double p2 = 0.0;
  DensitySampler rho;
  QuadratureRule rule_B;      // reference inclusion rule (tuning + union rule)
  QuadratureRule rule_bdry;   // boundary rule carrying f and g
  QuadratureRule rule_omega;  // volume rule on Omega for q^g
  std::shared_ptr<const NeumannGreen> green;
};

// All fields and pairings of one (f, g) evaluation. gap is assembled from the
// three-term formula
//   J = w^2 rho1 <v^g; u^f>_D + P^2 <q^g; u^f>_Omega - w^2 <rho v^g; u^f>_D,
// which coincides with lambda_d.value - lambda_p.value algebraically.
struct NdAssembly {
  NdPairing lambda_e, lambda_d, lambda_p, gap;
  VolumeField vg, qg, uf_d, uf_omega;
};

NdAssembly assemble_nd(const NdSetup& setup, const CVecX& f, const CVecX& g);

NdPairing nd_gap(const CVecX& f, const CVecX& g, const NdSetup& setup);

// ---------------------------------------------------------------------------
// Convergence study over a sweep of a (Assumption-1 scaling), fixed (f, g).
// ---------------------------------------------------------------------------

struct ConvergencePoint {
  double a = 0.0;
  std::size_t M = 0;
  double p2 = 0.0;
  double j_abs = 0.0;
  double exponent_running = 0.0;  // NaN while undefined (< 2 points / zero J)
};

struct ConvergenceStudy {
  std::vector<ConvergencePoint> points;
  double slope = 0.0;      // least-squares d log|J| / d log a (NaN if undefined)
  double intercept = 0.0;
  double reference_slope = 0.0;  // (1-h)(9-5e)/(18(3-e)) at e = 0.1
};

// Runs the sweep points concurrently (each point owns its Green tensor).
ConvergenceStudy convergence_study(const std::vector<NdSetup>& sweep, const CVecX& f,
                                   const CVecX& g);

// CSV with header a,M,P2,J_abs,exponent_running.
std::string study_csv(const ConvergenceStudy& study);
// JSON summary {"slope":..,"intercept":..,"reference_slope":..} (null if NaN).
std::string study_json(const ConvergenceStudy& study);

}  // namespace ecl
