#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

#include "ecl/background.hpp"

namespace ecl {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;

// ---------------------------------------------------------------------------
// Fundamental tensors of the Lamé system.
//
//   Kelvin (static):   G0_kl = (g1/4pi) d_kl/r + (g2/4pi) s_k s_l / r^3
//   Kupradze (omega):  G  = (1/mu) phi_ks I + 1/(mu ks^2) HessHess[phi_ks - phi_kp]
//   Yukawa shift:      same closed form with ks = iP/sqrt(mu), kp = iP/sqrt(lambda+2mu)
//
// with s = x - y, r = |s| and phi_k(r) = e^{ikr}/(4 pi r).
// ---------------------------------------------------------------------------

// Static Kelvin tensor Γ⁰(x,y); real symmetric, homogeneous of degree -1.
Mat3 kelvin_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg);

// Frequency-domain Kupradze tensor Γ^ω(x,y); reduces to Kelvin at omega = 0.
CMat3 kupradze_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                      double omega);

// General closed form with explicit (possibly complex) wavenumbers. The
// Yukawa-type tensor Φ_{iP} is kupradze_tensor_k with ks = iP/sqrt(mu),
// kp = iP/sqrt(lambda+2mu).
CMat3 kupradze_tensor_k(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                        Complex kp, Complex ks);

// Convenience: the shifted full-space tensor Φ_{iP}(x,y), real-valued in
// exact arithmetic (returned as complex for uniformity).
CMat3 yukawa_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                    double P);

// Partial sum (through n = n_max) of the power-series form of Γ^ω in omega.
CMat3 kupradze_series(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                      double omega, int n_max);

// Adaptive series: terms added until relative magnitude < 1e-16 (cap n = 60),
// Kahan-compensated.
CMat3 kupradze_series_auto(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                           double omega);

// Far-field factors (Γ_p^∞, Γ_s^∞) for observation direction xhat (|xhat|=1).
std::pair<CMat3, CMat3> far_field_tensors(const Vec3& xhat, const Vec3& y,
                                          const ElasticBackground& bg, double omega);

// Rank-3 gradients: G[m](k,l) = ∂/∂y_m Γ_kl(x,y).
using Grad3 = std::array<Mat3, 3>;
using CGrad3 = std::array<CMat3, 3>;

Grad3 kelvin_gradient(const Vec3& x, const Vec3& y, const ElasticBackground& bg);
CGrad3 kupradze_gradient_k(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                           Complex kp, Complex ks);

// Traction (double-layer) kernel: T_kl(x,y) = [∂_{ν_y} Γ(·-row view)]_kl, i.e.
// the traction in y, with outward normal nu_y, applied to each row field
// y ↦ Γ_k·(x,y). This is the DL kernel so that DL[φ](x) = ∫ T(x,y) φ(y) dσ(y).
Mat3 kelvin_traction_y(const Vec3& x, const Vec3& y, const Vec3& nu_y,
                       const ElasticBackground& bg);
CMat3 kupradze_traction_y_k(const Vec3& x, const Vec3& y, const Vec3& nu_y,
                            const ElasticBackground& bg, Complex kp, Complex ks);

// Traction in x with normal nu_x applied to the column fields x ↦ Γ·_l(x,y):
// the kernel of ∂_ν SL evaluated off-surface. Satisfies S(x,y) = T(y,x)^T.
Mat3 kelvin_traction_x(const Vec3& x, const Vec3& nu_x, const Vec3& y,
                       const ElasticBackground& bg);
CMat3 kupradze_traction_x_k(const Vec3& x, const Vec3& nu_x, const Vec3& y,
                            const ElasticBackground& bg, Complex kp, Complex ks);

// Traction of an analytically known field: λ(div u)ν + μ(J + Jᵀ)ν with
// J_km = ∂_m u_k.
inline CVec3 traction_of(const CMat3& jacobian, const Vec3& nu,
                         const ElasticBackground& bg) {
  Complex div = jacobian.trace();
  return bg.lambda * div * nu.cast<Complex>() +
         bg.mu * ((jacobian + jacobian.transpose()) * nu.cast<Complex>());
}

// Guard shared by all kernels: relative coincidence threshold.
void require_separated(const Vec3& x, const Vec3& y);

}  // namespace ecl
