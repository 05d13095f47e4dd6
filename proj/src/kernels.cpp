#include "ecl/kernels.hpp"

#include <cmath>

namespace ecl {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

// phi_k(r) = e^{ikr}/(4 pi r) and its radial derivatives:
//   phi'   = E (ikr - 1) / (4 pi r^2)
//   phi''  = E ((ikr)^2 - 2ikr + 2) / (4 pi r^3)
//   phi''' = E ((ikr)^3 - 3(ikr)^2 + 6ikr - 6) / (4 pi r^4)
struct Radial {
  Complex f0, f1, f2, f3;
};

Radial phi_derivs(Complex k, double r) {
  const Complex z = kI * k * r;
  const Complex e = std::exp(z) / (4.0 * kPi);
  Radial out;
  out.f0 = e / r;
  out.f1 = e * (z - 1.0) / (r * r);
  out.f2 = e * (z * z - 2.0 * z + 2.0) / (r * r * r);
  out.f3 = e * (z * z * z - 3.0 * z * z + 6.0 * z - 6.0) / (r * r * r * r);
  return out;
}

struct Separation {
  Vec3 s;
  double r;
  Vec3 shat;
};

Separation separation(const Vec3& x, const Vec3& y) {
  Separation sp;
  sp.s = x - y;
  sp.r = sp.s.norm();
  sp.shat = sp.s / sp.r;
  return sp;
}

// Radial profile of the general tensor G = A(r) I + B(r) shat shat^T together
// with the derivatives needed for gradients, where
//   g(r) = (phi_ks - phi_kp)/(mu ks^2),  A = phi_ks/mu + g'/r,  B = g'' - g'/r.
struct Profile {
  Complex A, B, Ap, Bp;  // A, B and radial derivatives
};

Profile kupradze_profile(const ElasticBackground& bg, Complex kp, Complex ks, double r) {
  const Radial ps = phi_derivs(ks, r);
  const Radial pp = phi_derivs(kp, r);
  const Complex cfac = 1.0 / (bg.mu * ks * ks);
  const Complex g1 = cfac * (ps.f1 - pp.f1);
  const Complex g2 = cfac * (ps.f2 - pp.f2);
  const Complex g3 = cfac * (ps.f3 - pp.f3);
  Profile pr;
  pr.A = ps.f0 / bg.mu + g1 / r;
  pr.B = g2 - g1 / r;
  pr.Ap = ps.f1 / bg.mu + g2 / r - g1 / (r * r);
  pr.Bp = g3 - g2 / r + g1 / (r * r);
  return pr;
}

template <typename Mat, typename Scalar>
Mat tensor_from_profile(Scalar A, Scalar B, const Vec3& shat) {
  Mat out = Mat::Identity() * A;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) out(k, l) += B * shat[k] * shat[l];
  return out;
}

// Gradient wrt y of G = A I + B shat shat^T (translation-invariant kernel):
//   d/ds_m G_kl = A' sm d_kl + B' sk sl sm + (B/r)(d_km sl + d_lm sk - 2 sk sl sm)
// with all s-factors normalized; gradient in y is the negative.
template <typename GradT, typename Scalar>
GradT gradient_from_profile(Scalar A, Scalar B, Scalar Ap, Scalar Bp, double r,
                            const Vec3& shat) {
  GradT out;
  for (int m = 0; m < 3; ++m) {
    auto& gm = out[m];
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        Scalar v = Ap * shat[m] * ((k == l) ? 1.0 : 0.0) +
                   Bp * shat[k] * shat[l] * shat[m] +
                   (B / r) * (((k == m) ? 1.0 : 0.0) * shat[l] +
                              ((l == m) ? 1.0 : 0.0) * shat[k] -
                              2.0 * shat[k] * shat[l] * shat[m]);
        gm(k, l) = -v;
      }
    }
  }
  return out;
}

// Traction in y from the rank-3 gradient G[m](k,l) = d/dy_m Gamma_kl:
//   T_kl = lambda (sum_p G[p](k,p)) nu_l + mu sum_m (G[l](k,m) + G[m](k,l)) nu_m
template <typename Mat, typename GradT>
Mat traction_y_from_gradient(const GradT& G, const Vec3& nu, const ElasticBackground& bg) {
  Mat T = Mat::Zero();
  for (int k = 0; k < 3; ++k) {
    auto div_k = G[0](k, 0) + G[1](k, 1) + G[2](k, 2);
    for (int l = 0; l < 3; ++l) {
      auto val = bg.lambda * div_k * nu[l];
      for (int m = 0; m < 3; ++m) val += bg.mu * (G[l](k, m) + G[m](k, l)) * nu[m];
      T(k, l) = val;
    }
  }
  return T;
}

// Traction in x (normal nu_x) applied to the column fields; gradient wrt x is
// the negative of the gradient wrt y for translation-invariant kernels.
template <typename Mat, typename GradT>
Mat traction_x_from_gradient(const GradT& G, const Vec3& nu, const ElasticBackground& bg) {
  Mat S = Mat::Zero();
  for (int l = 0; l < 3; ++l) {
    auto div_l = -(G[0](0, l) + G[1](1, l) + G[2](2, l));
    for (int k = 0; k < 3; ++k) {
      auto val = bg.lambda * div_l * nu[k];
      for (int m = 0; m < 3; ++m) val += bg.mu * (-G[m](k, l) - G[k](m, l)) * nu[m];
      S(k, l) = val;
    }
  }
  return S;
}

}  // namespace

void require_separated(const Vec3& x, const Vec3& y) {
  const double scale = std::max({1.0, x.norm(), y.norm()});
  if ((x - y).norm() < 1e-12 * scale)
    throw SingularEvaluationError("kernel evaluation at coincident points");
}

Mat3 kelvin_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg) {
  require_separated(x, y);
  const Separation sp = separation(x, y);
  const double c1 = bg.gamma1() / (4.0 * kPi * sp.r);
  const double c2 = bg.gamma2() / (4.0 * kPi * sp.r);
  return tensor_from_profile<Mat3>(c1, c2, sp.shat);
}

Grad3 kelvin_gradient(const Vec3& x, const Vec3& y, const ElasticBackground& bg) {
  require_separated(x, y);
  const Separation sp = separation(x, y);
  const double A = bg.gamma1() / (4.0 * kPi * sp.r);
  const double B = bg.gamma2() / (4.0 * kPi * sp.r);
  const double Ap = -A / sp.r;
  const double Bp = -B / sp.r;
  return gradient_from_profile<Grad3>(A, B, Ap, Bp, sp.r, sp.shat);
}

CMat3 kupradze_tensor_k(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                        Complex kp, Complex ks) {
  require_separated(x, y);
  const Separation sp = separation(x, y);
  const Profile pr = kupradze_profile(bg, kp, ks, sp.r);
  return tensor_from_profile<CMat3>(pr.A, pr.B, sp.shat);
}

CMat3 kupradze_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                      double omega) {
  if (omega < 0.0) throw ValidationError("kupradze_tensor: omega must be >= 0");
  if (omega == 0.0) return kelvin_tensor(x, y, bg).cast<Complex>();
  return kupradze_tensor_k(x, y, bg, Complex(bg.kp(omega)), Complex(bg.ks(omega)));
}

CMat3 yukawa_tensor(const Vec3& x, const Vec3& y, const ElasticBackground& bg, double P) {
  if (P <= 0.0) throw ValidationError("yukawa_tensor: P must be > 0");
  const Complex kp = kI * P / std::sqrt(bg.lambda + 2.0 * bg.mu);
  const Complex ks = kI * P / std::sqrt(bg.mu);
  return kupradze_tensor_k(x, y, bg, kp, ks);
}

CGrad3 kupradze_gradient_k(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                           Complex kp, Complex ks) {
  require_separated(x, y);
  const Separation sp = separation(x, y);
  const Profile pr = kupradze_profile(bg, kp, ks, sp.r);
  return gradient_from_profile<CGrad3>(pr.A, pr.B, pr.Ap, pr.Bp, sp.r, sp.shat);
}

Mat3 kelvin_traction_y(const Vec3& x, const Vec3& y, const Vec3& nu_y,
                       const ElasticBackground& bg) {
  return traction_y_from_gradient<Mat3>(kelvin_gradient(x, y, bg), nu_y, bg);
}

CMat3 kupradze_traction_y_k(const Vec3& x, const Vec3& y, const Vec3& nu_y,
                            const ElasticBackground& bg, Complex kp, Complex ks) {
  return traction_y_from_gradient<CMat3>(kupradze_gradient_k(x, y, bg, kp, ks), nu_y, bg);
}

Mat3 kelvin_traction_x(const Vec3& x, const Vec3& nu_x, const Vec3& y,
                       const ElasticBackground& bg) {
  return traction_x_from_gradient<Mat3>(kelvin_gradient(x, y, bg), nu_x, bg);
}

CMat3 kupradze_traction_x_k(const Vec3& x, const Vec3& nu_x, const Vec3& y,
                            const ElasticBackground& bg, Complex kp, Complex ks) {
  return traction_x_from_gradient<CMat3>(kupradze_gradient_k(x, y, bg, kp, ks), nu_x, bg);
}

// Series form in powers of omega:
//   Gamma_kl = 1/(4 pi rho0) sum_n i^n/((n+2) n!) [(n+1)/cs^{n+2} + 1/cp^{n+2}]
//                omega^n r^{n-1} d_kl
//            - 1/(4 pi rho0) sum_n i^n (n-1)/((n+2) n!) [1/cs^{n+2} - 1/cp^{n+2}]
//                omega^n r^{n-1} shat_k shat_l
CMat3 kupradze_series(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                      double omega, int n_max) {
  require_separated(x, y);
  if (n_max < 0) throw ValidationError("kupradze_series: n_max must be >= 0");
  const Separation sp = separation(x, y);
  const double pref = 1.0 / (4.0 * kPi * bg.rho0);
  const double cs = bg.cs(), cp = bg.cp();

  Complex sum_d = 0.0, sum_y = 0.0;  // delta and dyadic coefficients
  Complex comp_d = 0.0, comp_y = 0.0;  // Kahan compensation
  auto kahan = [](Complex& sum, Complex& comp, Complex term) {
    const Complex t = term - comp;
    const Complex next = sum + t;
    comp = (next - sum) - t;
    sum = next;
  };

  double inv_fact = 1.0;            // 1/n!
  Complex ipow = 1.0;               // i^n
  double wpow = 1.0;                // omega^n
  double rpow = 1.0 / sp.r;         // r^{n-1}
  double cs_pow = 1.0 / (cs * cs);  // 1/cs^{n+2}
  double cp_pow = 1.0 / (cp * cp);
  for (int n = 0; n <= n_max; ++n) {
    const double common = inv_fact / (n + 2.0) * wpow * rpow;
    kahan(sum_d, comp_d, ipow * common * ((n + 1.0) * cs_pow + cp_pow));
    kahan(sum_y, comp_y, -ipow * (n - 1.0) * common * (cs_pow - cp_pow));
    inv_fact /= (n + 1.0);
    ipow *= kI;
    wpow *= omega;
    rpow *= sp.r;
    cs_pow /= cs;
    cp_pow /= cp;
  }
  return tensor_from_profile<CMat3>(pref * sum_d, pref * sum_y, sp.shat);
}

CMat3 kupradze_series_auto(const Vec3& x, const Vec3& y, const ElasticBackground& bg,
                           double omega) {
  require_separated(x, y);
  const Separation sp = separation(x, y);
  const double pref = 1.0 / (4.0 * kPi * bg.rho0);
  const double cs = bg.cs(), cp = bg.cp();

  Complex sum_d = 0.0, sum_y = 0.0, comp_d = 0.0, comp_y = 0.0;
  auto kahan = [](Complex& sum, Complex& comp, Complex term) {
    const Complex t = term - comp;
    const Complex next = sum + t;
    comp = (next - sum) - t;
    sum = next;
  };

  double inv_fact = 1.0;
  Complex ipow = 1.0;
  double wpow = 1.0;
  double rpow = 1.0 / sp.r;
  double cs_pow = 1.0 / (cs * cs);
  double cp_pow = 1.0 / (cp * cp);
  for (int n = 0; n <= 60; ++n) {
    const double common = inv_fact / (n + 2.0) * wpow * rpow;
    const Complex td = ipow * common * ((n + 1.0) * cs_pow + cp_pow);
    const Complex ty = -ipow * (n - 1.0) * common * (cs_pow - cp_pow);
    kahan(sum_d, comp_d, td);
    kahan(sum_y, comp_y, ty);
    if (n > 2 && std::abs(td) < 1e-16 * std::abs(sum_d) &&
        std::abs(ty) < 1e-16 * (std::abs(sum_y) + std::abs(sum_d)))
      break;
    inv_fact /= (n + 1.0);
    ipow *= kI;
    wpow *= omega;
    rpow *= sp.r;
    cs_pow /= cs;
    cp_pow /= cp;
  }
  return tensor_from_profile<CMat3>(pref * sum_d, pref * sum_y, sp.shat);
}

std::pair<CMat3, CMat3> far_field_tensors(const Vec3& xhat, const Vec3& y,
                                          const ElasticBackground& bg, double omega) {
  if (std::abs(xhat.norm() - 1.0) > 1e-10)
    throw ValidationError("far_field_tensors: direction must be a unit vector");
  const Mat3 proj = xhat * xhat.transpose();
  const Complex ep = std::exp(-kI * bg.kp(omega) * xhat.dot(y));
  const Complex es = std::exp(-kI * bg.ks(omega) * xhat.dot(y));
  CMat3 gp = proj.cast<Complex>() * (ep / (4.0 * kPi * (bg.lambda + 2.0 * bg.mu)));
  CMat3 gs = (Mat3::Identity() - proj).cast<Complex>() * (es / (4.0 * kPi * bg.mu));
  return {gp, gs};
}

}  // namespace ecl
