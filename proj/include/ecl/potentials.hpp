#pragma once

#include <Eigen/LU>
#include <functional>
#include <map>
#include <memory>

#include "ecl/block_operator.hpp"

namespace ecl {

using DensitySampler = std::function<double(const Vec3&)>;

// ---------------------------------------------------------------------------
// Newtonian volume potential and its spectrum on the reference inclusion.
// ---------------------------------------------------------------------------

// N_D with Kelvin kernel on a volume rule; equivalent-ball corrected diagonal.
BlockOperator assemble_newtonian(const QuadratureRule& rule, const ElasticBackground& bg);

struct NewtonSpectrum {
  VecX eigenvalues;           // descending, positive
  MatX eigenvectors;          // 3N x n_count, value-space fields e_n(x_i)
  Eigen::Matrix3Xd moments;   // m_n = ∫ e_n dx
  VecX coupling;              // s_n = |m_n|^2
};

NewtonSpectrum newton_spectrum(const QuadratureRule& rule_B, const ElasticBackground& bg,
                               int n_count);

// Coupling summed over the degenerate eigenvalue cluster containing n0
// (relative eigenvalue tolerance rel_tol).
double cluster_coupling(const NewtonSpectrum& spec, int n0, double rel_tol = 1e-3);

// ---------------------------------------------------------------------------
// Layer potentials (off-surface targets).
// ---------------------------------------------------------------------------

enum class LayerKind { Single, Double };

// Kelvin (P = 0) or P-shifted layer potential from a boundary rule to
// off-surface targets.
BlockOperator assemble_layer(const QuadratureRule& rule_bdry,
                             const QuadratureRule& rule_target,
                             const ElasticBackground& bg, LayerKind kind,
                             double P = 0.0);

// On-surface single-layer matrix (weakly singular; equivalent-disc diagonal).
CMatX single_layer_on_surface(const QuadratureRule& rule_bdry,
                              const ElasticBackground& bg, double P = 0.0);

// ---------------------------------------------------------------------------
// Neumann-Poincaré operator at shift P >= 0.
// ---------------------------------------------------------------------------

struct NeumannPoincare {
  QuadratureRule rule;
  double P = 0.0;
  CMatX K;      // double-layer direction, Gauss-identity diagonal
  CMatX Kstar;  // traction-of-single-layer direction (weighted adjoint)
  Eigen::PartialPivLU<CMatX> half_plus_K;      // factor of (1/2 I + K)
  Eigen::PartialPivLU<CMatX> half_plus_Kstar;  // factor of (1/2 I + K*)
};

std::shared_ptr<NeumannPoincare> neumann_poincare(const QuadratureRule& rule_bdry,
                                                  const ElasticBackground& bg, double P);

// Smallest singular value of (1/2 I + K) — invertibility diagnostic.
double np_min_singular_value(const NeumannPoincare& np);

// ---------------------------------------------------------------------------
// P-shifted Neumann kernel machinery (§5.3): SL^P and N^P.
// ---------------------------------------------------------------------------

// SL^P: boundary traction f -> field with ∂_ν SL^P(f) = f for the shifted
// operator (L - P^2) with zero... (interior Neumann problem on Ω).
struct ShiftedSingleLayer {
  std::shared_ptr<NeumannPoincare> np;
  ElasticBackground bg;
  double P = 0.0;
  CMatX sl_on;  // on-surface single-layer matrix at shift P

  // density φ with SL^P(f) = S^{iP}[φ]
  CVecX density(const CVecX& f_values) const;
  // evaluate at off-surface targets
  std::vector<CVec3> evaluate(const CVecX& f_values, const std::vector<Vec3>& targets) const;
  // boundary trace (on-surface single layer applied to the density)
  CVecX trace(const CVecX& f_values) const;
};

ShiftedSingleLayer make_shifted_single_layer(const QuadratureRule& rule_bdry,
                                             const ElasticBackground& bg, double P);

// N^P (volume Newtonian with Neumann Green kernel Γ_P) plus its boundary
// trace operator γN^P.
struct NPOperator {
  double p2 = 0.0;
  BlockOperator op;     // volume -> volume
  BlockOperator trace;  // volume -> boundary (γ N^P)
};

NPOperator assemble_np(const QuadratureRule& rule_vol, const QuadratureRule& rule_bdry,
                       const ElasticBackground& bg, double p2);

// ---------------------------------------------------------------------------
// Neumann Green tensor Γ = Γ⁰ + R of the ω-frequency, variable-ρ problem.
// ---------------------------------------------------------------------------

enum class GreenMode { FreeSpace, Corrected };

class NeumannGreen {
public:
  // free-space mode
  NeumannGreen(const ElasticBackground& bg, GreenMode mode);
  // corrected mode: §5.7 boundary-volume representation of R
  NeumannGreen(const QuadratureRule& rule_vol, const QuadratureRule& rule_bdry,
               const ElasticBackground& bg, const DensitySampler& rho, double omega);

  GreenMode mode() const { return mode_; }
  const ElasticBackground& background() const { return bg_; }
  double omega() const { return omega_; }

  // Γ(x, y) (free-space: Kelvin; corrected: Kelvin + R)
  CMat3 gamma(const Vec3& x, const Vec3& y) const;
  // correction only (zero in free-space mode)
  CMat3 R(const Vec3& x, const Vec3& y) const;

  // Precompute/cache the correction for a source point.
  void prepare_sources(const std::vector<Vec3>& ys) const;

  // Corrected mode only: boundary rule the correction was built on.
  const QuadratureRule& boundary_rule() const;
  // Corrected mode only: interior Neumann solve (L + ω²ρ) S = 0 with
  // ∂_ν S = g on the boundary rule, evaluated at interior targets. This is
  // S(x) = ∫_∂Ω Γ(x, y) g(y) dσ(y) computed through the stable second-kind
  // block system instead of boundary-pole evaluations of R.
  std::vector<CVec3> neumann_solve(const CVecX& g,
                                   const std::vector<Vec3>& targets) const;

private:
  struct Impl;
  GreenMode mode_;
  ElasticBackground bg_;
  double omega_ = 0.0;
  std::shared_ptr<Impl> impl_;
};

}  // namespace ecl
