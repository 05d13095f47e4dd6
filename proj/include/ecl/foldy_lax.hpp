#pragma once

#include "ecl/geometry.hpp"
#include "ecl/potentials.hpp"

namespace ecl {

// 3-vector field sampled on the nodes of a quadrature rule.
struct VolumeField {
  QuadratureRule rule;
  std::vector<CVec3> values;

  CVecX packed() const { return pack_field(values); }
  double l2_norm() const;
};

// S(x) = Σ_j w_j Γ(x, y_j) g(y_j) for strictly interior targets.
VolumeField background_field(Domain domain, const CVecX& g,
                             const QuadratureRule& rule_bdry,
                             const NeumannGreen& green,
                             const std::vector<Vec3>& targets);

// ---------------------------------------------------------------------------
// Discrete interaction system:
//   Y_m + Σ_{j≠m} Γ(z_m, z_j) 𝒫² a^{1−h} (1/β_j) Y_j = S(z_m).
// ---------------------------------------------------------------------------

struct FoldyLaxSystem {
  std::vector<Vec3> centers;
  CMatX matrix;  // (3M) x (3M); identity diagonal blocks
  CVecX rhs;     // packed S(z_m)
};

FoldyLaxSystem assemble_system(const ClusterGeometry& cluster,
                               const NeumannGreen& green, double p2,
                               const std::vector<Complex>& beta,
                               const std::vector<CVec3>& s_at_centers);

struct FoldyLaxSolution {
  std::vector<CVec3> y;
  double condition = 0.0;  // SVD condition number of the system matrix
  double residual = 0.0;   // ||A y − s|| / ||s||
};

FoldyLaxSolution solve_system(const FoldyLaxSystem& system);

// ---------------------------------------------------------------------------
// Continuous Lippmann-Schwinger equation on Ω:
//   Y(z) + 𝒫² ∫_Ω Γ(z, y) Y(y) dy = S(z).
// ---------------------------------------------------------------------------

VolumeField solve_continuous_lse(double p2, const NeumannGreen& green,
                                 const QuadratureRule& rule_vol,
                                 const VolumeField& s);

// Nyström re-quadrature of the solved LSE at an off-node point:
//   Y(z) = S(z) − 𝒫² Σ_q w_q Γ(z, y_q) Y(y_q).
CVec3 lse_value_at(const VolumeField& y_cont, double p2, const NeumannGreen& green,
                   const Vec3& z, const CVec3& s_at_z);

// RMS over m of |Y_m − Y(z_m)| normalized by the RMS of |Y(z_m)|.
double discrete_continuous_gap(const std::vector<CVec3>& ys,
                               const VolumeField& y_cont, double p2,
                               const NeumannGreen& green,
                               const std::vector<Vec3>& centers,
                               const std::vector<CVec3>& s_at_centers);

}  // namespace ecl
