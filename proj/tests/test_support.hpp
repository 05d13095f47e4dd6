#pragma once

// Shared finite-difference oracles and small helpers for the test suites.

#include <functional>
#include <random>

#include "ecl/kernels.hpp"

namespace ecl::testing {

using VecField = std::function<CVec3(const Vec3&)>;

// Second-order central-difference application of the Navier operator
//   L u = mu Lap u + (lambda + mu) grad(div u)
inline CVec3 fd_navier(const VecField& u, const Vec3& x, const ElasticBackground& bg,
                       double step) {
  CVec3 lap = CVec3::Zero();
  const CVec3 u0 = u(x);
  Eigen::Matrix3cd jac_sum = Eigen::Matrix3cd::Zero();  // d_k d_m u_m pieces
  for (int m = 0; m < 3; ++m) {
    Vec3 e = Vec3::Zero();
    e[m] = step;
    lap += (u(x + e) - 2.0 * u0 + u(x - e)) / (step * step);
  }
  // grad(div u): mixed second derivatives d_k d_m u_m
  CVec3 gd = CVec3::Zero();
  for (int k = 0; k < 3; ++k) {
    for (int m = 0; m < 3; ++m) {
      Vec3 ek = Vec3::Zero(), em = Vec3::Zero();
      ek[k] = step;
      em[m] = step;
      Complex d2;
      if (k == m) {
        d2 = (u(x + ek)[m] - 2.0 * u0[m] + u(x - ek)[m]) / (step * step);
      } else {
        d2 = (u(x + ek + em)[m] - u(x + ek - em)[m] - u(x - ek + em)[m] +
              u(x - ek - em)[m]) /
             (4.0 * step * step);
      }
      gd[k] += d2;
    }
  }
  (void)jac_sum;
  return bg.mu * lap + (bg.lambda + bg.mu) * gd;
}

// Central-difference Jacobian J_km = d u_k / d x_m.
inline Eigen::Matrix3cd fd_jacobian(const VecField& u, const Vec3& x, double step) {
  Eigen::Matrix3cd J;
  for (int m = 0; m < 3; ++m) {
    Vec3 e = Vec3::Zero();
    e[m] = step;
    const CVec3 d = (u(x + e) - u(x - e)) / (2.0 * step);
    for (int k = 0; k < 3; ++k) J(k, m) = d[k];
  }
  return J;
}

// Vector-valued quadratic polynomial with closed-form Jacobian, traction and
// (constant) Navier image; used as a smooth test field in weak-form identities.
struct PolyField {
  Mat3 A = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  std::array<Mat3, 3> Q{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};

  Vec3 value(const Vec3& x) const {
    Vec3 v = A * x + b;
    for (int k = 0; k < 3; ++k) v[k] += x.dot(Q[k] * x);
    return v;
  }
  Mat3 jacobian(const Vec3& x) const {  // J(k,m) = d_m v_k
    Mat3 J = A;
    for (int k = 0; k < 3; ++k) J.row(k) += (2.0 * Q[k] * x).transpose();
    return J;
  }
  Vec3 navier(const ElasticBackground& bg) const {  // L v, constant in x
    Vec3 lv;
    for (int k = 0; k < 3; ++k) {
      double lap = 2.0 * Q[k].trace();
      double gd = 0;  // d_k div v = 2 sum_l Q_l(l, k)
      for (int l = 0; l < 3; ++l) gd += 2.0 * Q[l](l, k);
      lv[k] = bg.mu * lap + (bg.lambda + bg.mu) * gd;
    }
    return lv;
  }
  Vec3 traction(const Vec3& x, const Vec3& nu, const ElasticBackground& bg) const {
    Mat3 J = jacobian(x);
    return bg.lambda * J.trace() * nu + bg.mu * ((J + J.transpose()) * nu);
  }

  static PolyField random(std::mt19937& rng) {
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    PolyField pf;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        pf.A(i, j) = ur(rng);
        for (int k = 0; k < 3; ++k) pf.Q[k](i, j) = 0.3 * ur(rng);
      }
    for (int k = 0; k < 3; ++k) pf.Q[k] = 0.5 * (pf.Q[k] + pf.Q[k].transpose().eval());
    pf.b = Vec3(ur(rng), ur(rng), ur(rng));
    return pf;
  }
};

inline Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Vec3 random_in_box(std::mt19937& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  return Vec3(u(rng), u(rng), u(rng));
}

}  // namespace ecl::testing
