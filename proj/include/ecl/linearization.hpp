#pragma once

#include <string>

#include "ecl/foldy_lax.hpp"
#include "ecl/potentials.hpp"

namespace ecl {

// ---------------------------------------------------------------------------
// First-order linearization of the effective Neumann problem:
//   Q^f = SL^P(f),   W^{Q^f} = N^P(rho Q^f),
//   Lambda_P(f) - gamma(Q^f) = omega^2 gamma(W^{Q^f}) + remainder.
// ---------------------------------------------------------------------------

// Q^f sampled on a volume rule plus its boundary trace.
struct QfField {
  VolumeField volume;
  QuadratureRule rule_bdry;
  CVecX trace;  // gamma Q^f at boundary nodes
};

QfField solve_qf(const CVecX& f, double p2, const ElasticBackground& bg,
                 const QuadratureRule& rule_bdry, const QuadratureRule& rule_vol);

// W = N^P(rho Q^f) by one operator application on the volume rule of np.
VolumeField solve_wqf(const VolumeField& qf, const DensitySampler& rho,
                      const NPOperator& np);

// Off-node Nystrom evaluation of N^P(m)(x) for interior x (finite-difference
// oracles); m is a packed field on np.op.source_rule.
CVec3 np_value_at(const NPOperator& np, const ElasticBackground& bg, const CVecX& m,
                  const Vec3& x);

// Geometric-series contraction factor eta = omega^2 ||rho||_inf ||N^P||.
double series_eta(const NPOperator& np, const DensitySampler& rho, double omega);

// Computable H^{1/2} surrogate: (L2(bdry)^2 + tangential-gradient L2^2)^{1/2}
// with the gradient taken by forward differences over the rule's patches.
double h_half_surrogate(const QuadratureRule& rule_bdry, const CVecX& u);

struct LinearizationSetup {
  ElasticBackground bg;
  double p2 = 0.0;
  double omega = 1.0;
  DensitySampler rho;
  QuadratureRule rule_vol;
  QuadratureRule rule_bdry;
};

struct LinearizedRecord {
  QfField qf;
  VolumeField wqf;
  CVecX boundary_lhs;  // Lambda_P(f) - gamma(Q^f)
  CVecX boundary_rhs;  // omega^2 gamma(W^{Q^f})
  double remainder_norm = 0.0;  // H^{1/2} surrogate of lhs - rhs
  double eta = 0.0;
  double p2 = 0.0;
};

// Solves the full effective problem q = Q^f + omega^2 N^P(rho q), forms both
// sides of the linearization identity and the remainder norm. Asserts eta < 1.
LinearizedRecord linearization_check(const CVecX& f, const LinearizationSetup& setup);

// {p2, eta, remainder_norm, remainder_times_p4} with the P^4/||f|| scaling.
std::string linearization_json(const LinearizedRecord& rec, double f_norm);

}  // namespace ecl
