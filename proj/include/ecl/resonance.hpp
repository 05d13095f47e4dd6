#pragma once

#include <cmath>

#include "ecl/geometry.hpp"
#include "ecl/potentials.hpp"

namespace ecl {

// ---------------------------------------------------------------------------
// Frequency tuning about a Newtonian resonance of the reference inclusion:
//   ω² = ω₀² (1 − c_{n0} a^h),  ω₀² = 1 / (ρ̃₁ λ_{n0}^B),  ρ₁ = ρ̃₁ a⁻².
// With these conventions 1 − ω²ρ₁λ_{n0}^{D} = c_{n0} a^h exactly (λ^D = a²λ^B).
// ---------------------------------------------------------------------------

struct FrequencySetting {
  int n0 = 0;
  double c_n0 = -1.0;
  double h = 0.5;
  double a = 0.01;
  double rho_tilde1 = 1.0;
  double lambda_n0_B = 0.0;  // reference-inclusion eigenvalue λ_{n0}^B

  double rho1() const { return rho_tilde1 / (a * a); }
  double omega0_sq() const { return 1.0 / (rho_tilde1 * lambda_n0_B); }
  double omega_sq() const { return omega0_sq() * (1.0 - c_n0 * std::pow(a, h)); }
  double omega() const { return std::sqrt(omega_sq()); }

  // spectral gap 1 − ω²ρ₁λ for a discrete eigenvalue λ of N_{D} (D = z + aB)
  double gap(double lambda_D) const { return 1.0 - omega_sq() * rho1() * lambda_D; }
  // gap at the tuned mode (algebraic identity c_{n0} a^h)
  double gap_at_n0() const { return c_n0 * std::pow(a, h); }
};

FrequencySetting tune_frequency(const NewtonSpectrum& spec_B, int n0, double c_n0,
                                double a, double h, double rho_tilde1 = 1.0);

// Coupling s_{n0} averaged over the degenerate eigenvalue cluster at n0
// (basis-independent; for the ball triple each mode carries s_cluster / 3).
double effective_coupling(const NewtonSpectrum& spec_B, int n0);

// 𝒫² = −s_{n0} / (λ_{n0}^B c_{n0}) > 0 for a coupled mode and c_{n0} < 0.
double effective_p2(const NewtonSpectrum& spec_B, int n0, double c_n0);

// ---------------------------------------------------------------------------
// Per-inclusion resolvent field: (ω²ρ₁)⁻¹ W − N_{D_m}[W] = 𝕀 (three constant
// right-hand sides, one per coordinate direction; columns of the 3×3 values).
// ---------------------------------------------------------------------------

struct WField {
  QuadratureRule rule;
  std::vector<Mat3> values;

  Mat3 integral() const;  // ∫_{D_m} W dx
  double l2_norm() const;
};

WField solve_w(const QuadratureRule& rule_Dm, const FrequencySetting& setting,
               const ElasticBackground& bg);

// Scattering weight α = (1/3) tr ∫ W dx (scalar reduction of the matrix
// integral, consistent with the isotropy of the ball inclusion).
double scattering_alpha(const WField& w);

// β_m = 1 − (1/3) tr ∫_{D_m} W_m(x) R(x, z_m) dx; w_ref is the reference
// solve on the origin-centered rule for aB (all D_m are translates).
// Throws if any |β_m| ≤ 0.5 (the Foldy-Lax system divides by β_m).
std::vector<Complex> beta_coefficients(const ClusterGeometry& cluster,
                                       const WField& w_ref,
                                       const NeumannGreen& green);

struct EffectiveParams {
  double p2 = 0.0;
  double alpha = 0.0;
  std::vector<Complex> beta;
};

}  // namespace ecl
