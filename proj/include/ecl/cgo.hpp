#pragma once

#include <array>
#include <map>
#include <string>

#include "ecl/foldy_lax.hpp"

namespace ecl {

// ---------------------------------------------------------------------------
// Complex-geometrical-optics pairs for the shifted Lame operator (L - P^2):
// exact closed-form pairs (remark variant) used for Fourier inversion of rho,
// and the t-parameter skeleton (theorem variant) for the remainder law.
// ---------------------------------------------------------------------------

enum class CgoVariant { Remark, Theorem };

struct CgoPair {
  Vec3 xi;      // nonzero dual-lattice vector (2 pi * integer triple on the unit cube)
  Mat3 basis;   // columns e1 = xi/|xi|, e2, e3 (deterministic completion)
  CVec3 zeta1, zeta2, eta1, eta2;
  CgoVariant variant = CgoVariant::Remark;
  double p2 = 0.0;
  double mu = 0.0;
  double t = 0.0;     // theorem variant: t = sqrt(P^{4+2 iota} + ks^2)
  double iota = 0.0;  // theorem variant
};

// Deterministic basis completion: e2 = normalize(e1 x ehat) with ehat the
// canonical axis least aligned with e1, e3 = e1 x e2.
CgoPair make_cgo_pair(const Vec3& xi, double p2, const ElasticBackground& bg,
                      CgoVariant variant, double iota = 1.0, double omega = 1.0);

// Q^f (which = 1) or v (which = 2): eta e^{i zeta . x}. Remark variant only.
CVec3 cgo_field(const CgoPair& pair, int which, const Vec3& x);

// The non-vanishing divisor -2 - 4 P^2 / (mu |xi|^2).
double cgo_divisor(const CgoPair& pair);

// Closed-form traction of field `which`: i mu e^{i zeta . x}
// [(zeta . nu) eta + (eta . nu) zeta]. Remark variant only.
CVec3 cgo_traction(const CgoPair& pair, int which, const Vec3& x, const Vec3& nu);

// Theorem-variant remainder magnitude law P^2 / t (= O(P^{-iota})).
double cgo_remainder_scale(const CgoPair& pair);

// Ground-truth volume quadrature of int_Omega rho Q^f . v dx (undivided).
Complex fourier_datum_volume_oracle(const CgoPair& pair, const DensitySampler& rho,
                                    const QuadratureRule& rule_vol);

// Boundary route: int_bdry W . dnu(eta2 e^{i zeta2 . x}) dS / divisor, the
// xi-th Fourier datum of rho chi_Omega from a W^{Q^f} boundary trace.
Complex fourier_datum_boundary(const CgoPair& pair, const CVecX& wqf_trace,
                               const QuadratureRule& rule_bdry);

// ---------------------------------------------------------------------------
// Fourier synthesis on the period cube.
// ---------------------------------------------------------------------------

using LatticeIndex = std::array<int, 3>;  // xi = 2 pi n
using FourierData = std::map<LatticeIndex, Complex>;

struct FourierReconstruction {
  int lattice_cut = 0;
  FourierData coeffs;
  VolumeField synthesized;  // rho - mean sampled on the volume rule
  double truncation_error_estimate = 0.0;  // l2 mass of the outermost shell
};

// Synthesize rho - mean = sum_{0 < |n|_inf <= cut} c_n e^{i 2 pi n . x}. Data
// must cover the full symmetric lattice; missing entries are listed.
FourierReconstruction reconstruct_density(const FourierData& data, int lattice_cut,
                                          const QuadratureRule& rule_vol);

// Relative L2(Omega) error of the synthesis against truth - quadrature mean.
double reconstruction_error(const FourierReconstruction& rec, const DensitySampler& truth);

// CSV export: header xi1,xi2,xi3,re,im; fixed lattice order.
std::string fourier_data_csv(const FourierData& data);

}  // namespace ecl
