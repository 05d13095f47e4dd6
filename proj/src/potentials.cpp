#include "ecl/potentials.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace ecl {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

struct ShiftWavenumbers {
  Complex kp, ks;
};

ShiftWavenumbers shift_k(const ElasticBackground& bg, double P) {
  return {kI * P / std::sqrt(bg.lambda + 2.0 * bg.mu), kI * P / std::sqrt(bg.mu)};
}

CMat3 phi_kernel(const ElasticBackground& bg, double P, const Vec3& x, const Vec3& y) {
  if (P == 0.0) return kelvin_tensor(x, y, bg).cast<Complex>();
  auto [kp, ks] = shift_k(bg, P);
  return kupradze_tensor_k(x, y, bg, kp, ks);
}

CMat3 traction_y_kernel(const ElasticBackground& bg, double P, const Vec3& x,
                        const Vec3& y, const Vec3& nu_y) {
  if (P == 0.0) return kelvin_traction_y(x, y, nu_y, bg).cast<Complex>();
  auto [kp, ks] = shift_k(bg, P);
  return kupradze_traction_y_k(x, y, nu_y, bg, kp, ks);
}

void put_block(CMatX& M, std::size_t i, std::size_t j, const CMat3& b) {
  M.block<3, 3>(3 * i, 3 * j) = b;
}

// Analytic integral of the Kelvin kernel over the ball of volume w centered
// at the singular point: (gamma1/2 + gamma2/6) Req^2 I.
CMat3 kelvin_self_integral(const ElasticBackground& bg, double w) {
  const double req = std::cbrt(3.0 * w / (4.0 * kPi));
  const double c = (0.5 * bg.gamma1() + bg.gamma2() / 6.0) * req * req;
  return (c * Mat3::Identity()).cast<Complex>();
}

// Exact integral of Phi_{iP} over the ball of radius R about the singular
// point. With a_s = P/sqrt(mu), a_p = P/sqrt(lambda+2mu) and
// E_a = e^{-aR}(1+aR):
//   int phi_a = (1-E_a)/a^2,   int Hess f = f'(R) (4 pi R^2/3) I
// giving (1/P^2)[(1-E_s) + (E_s-E_p)/3] I; reduces to the Kelvin value
// (gamma1/2 + gamma2/6) R^2 I as P -> 0.
CMat3 yukawa_ball_integral(const ElasticBackground& bg, double P, double R) {
  const double as = P / std::sqrt(bg.mu);
  const double ap = P / std::sqrt(bg.lambda + 2.0 * bg.mu);
  const double Es = std::exp(-as * R) * (1.0 + as * R);
  const double Ep = std::exp(-ap * R) * (1.0 + ap * R);
  const double c = ((1.0 - Es) + (Es - Ep) / 3.0) / (P * P);
  return (c * Mat3::Identity()).cast<Complex>();
}

// Exact integral of Phi_{iP} over the flat disc of radius R in the tangent
// plane with unit normal nu. For the radial f = phi_s - phi_p:
//   int_disc Hess f = pi R f'(R) T + 2 pi (f(R)-f(0)) nu nu^T,  T = I - nu nu^T
//   int_disc phi_s  = (1-e^{-a_s R})/(2 a_s)
// Reduces to (gamma1 R/2) I + (gamma2 R/4) T as P -> 0.
CMat3 yukawa_disc_integral(const ElasticBackground& bg, double P, double R,
                           const Vec3& nu) {
  const Mat3 T = Mat3::Identity() - nu * nu.transpose();
  const double as = P / std::sqrt(bg.mu);
  const double ap = P / std::sqrt(bg.lambda + 2.0 * bg.mu);
  const double phi_int = (1.0 - std::exp(-as * R)) / (2.0 * as);
  auto f = [&](double r) {
    return (std::exp(-as * r) - std::exp(-ap * r)) / (4.0 * kPi * r);
  };
  const double f0 = (ap - as) / (4.0 * kPi);
  const double fpR = ((-as * std::exp(-as * R) + ap * std::exp(-ap * R)) * R -
                      (std::exp(-as * R) - std::exp(-ap * R))) /
                     (4.0 * kPi * R * R);
  Mat3 out = (phi_int / bg.mu) * Mat3::Identity() -
             (1.0 / (P * P)) *
                 (kPi * R * fpR * T + 2.0 * kPi * (f(R) - f0) * nu * nu.transpose());
  return out.cast<Complex>();
}

// Volume-to-volume kernel matrix of Phi_P with weights folded in and the
// equivalent-ball diagonal correction.
CMatX newtonian_matrix(const QuadratureRule& rule, const ElasticBackground& bg, double P) {
  const std::size_t n = rule.size();
  CMatX M(3 * n, 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        const double req = std::cbrt(3.0 * rule.weights[i] / (4.0 * kPi));
        CMat3 diag = (P > 0.0) ? yukawa_ball_integral(bg, P, req)
                               : kelvin_self_integral(bg, rule.weights[i]);
        put_block(M, i, j, diag);
      } else {
        put_block(M, i, j,
                  rule.weights[j] * phi_kernel(bg, P, rule.nodes[i], rule.nodes[j]));
      }
    }
  }
  return M;
}

// Kernel-only (no weights) boundary-target x volume-source matrix of Phi_P.
CMatX phi_kernel_matrix(const std::vector<Vec3>& targets, const QuadratureRule& src,
                        const ElasticBackground& bg, double P, bool fold_weights) {
  CMatX M(3 * targets.size(), 3 * src.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = 0; j < src.size(); ++j) {
      CMat3 b = phi_kernel(bg, P, targets[i], src.nodes[j]);
      if (fold_weights) b *= src.weights[j];
      put_block(M, i, j, b);
    }
  return M;
}

// Double-layer matrix (weights folded) from a boundary rule to arbitrary
// off-surface targets.
CMatX dl_matrix(const std::vector<Vec3>& targets, const QuadratureRule& bdry,
                const ElasticBackground& bg, double P) {
  CMatX M(3 * targets.size(), 3 * bdry.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = 0; j < bdry.size(); ++j)
      put_block(M, i, j,
                bdry.weights[j] *
                    traction_y_kernel(bg, P, targets[i], bdry.nodes[j], bdry.normals[j]));
  return M;
}

// DL matrix for strictly interior targets with singularity subtraction:
// DL[C](x) = DL[C - C(x*)](x) + DL[1](x) C(x*) with x* the nearest boundary
// node. Exact on constant densities and only weakly singular for smooth ones,
// which keeps near-boundary volume targets accurate. For the static kernel
// DL[1] = -I (Gauss identity); for the P-shifted kernel DL[1](x) =
// P^2 M_P(x) - I with M_P(x) = int_Omega Phi_P(x, y) dy, supplied per target.
CMatX dl_matrix_inside(const std::vector<Vec3>& targets, const QuadratureRule& bdry,
                       const ElasticBackground& bg, double P,
                       const std::vector<CMat3>* dl_of_one = nullptr) {
  CMatX M = dl_matrix(targets, bdry, bg, P);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::max();
    CMat3 row_sum = CMat3::Zero();
    for (std::size_t j = 0; j < bdry.size(); ++j) {
      row_sum += M.block<3, 3>(3 * i, 3 * j);
      const double d = (targets[i] - bdry.nodes[j]).squaredNorm();
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    const CMat3 exact =
        dl_of_one ? (*dl_of_one)[i] : CMat3(-CMat3::Identity());
    M.block<3, 3>(3 * i, 3 * nearest) -= row_sum - exact;
  }
  return M;
}

}  // namespace

BlockOperator assemble_newtonian(const QuadratureRule& rule, const ElasticBackground& bg) {
  if (rule.is_boundary())
    throw ValidationError("assemble_newtonian: expected a volume rule");
  BlockOperator op;
  op.source_rule = rule;
  op.target_rule = rule;
  op.mat = newtonian_matrix(rule, bg, 0.0);
  return op;
}

NewtonSpectrum newton_spectrum(const QuadratureRule& rule_B, const ElasticBackground& bg,
                               int n_count) {
  if (n_count < 1) throw ValidationError("newton_spectrum: n_count must be >= 1");
  BlockOperator op = assemble_newtonian(rule_B, bg);
  const std::size_t n = rule_B.size();
  // symmetrize: S = D^{1/2} Kernel D^{1/2} = D^{1/2} mat D^{-1/2}
  MatX S(3 * n, 3 * n);
  for (std::size_t i = 0; i < 3 * n; ++i)
    for (std::size_t j = 0; j < 3 * n; ++j)
      S(i, j) = op.mat(i, j).real() * std::sqrt(rule_B.weights[i / 3]) /
                std::sqrt(rule_B.weights[j / 3]);
  S = 0.5 * (S + S.transpose().eval());  // kill roundoff asymmetry
  Eigen::SelfAdjointEigenSolver<MatX> es(S);
  if (es.info() != Eigen::Success)
    throw NumericalError("newton_spectrum: eigensolver failed to converge");

  const int total = static_cast<int>(3 * n);
  n_count = std::min(n_count, total);
  NewtonSpectrum spec;
  spec.eigenvalues.resize(n_count);
  spec.eigenvectors.resize(total, n_count);
  spec.moments.resize(3, n_count);
  spec.coupling.resize(n_count);
  for (int k = 0; k < n_count; ++k) {
    const int src = total - 1 - k;  // Eigen sorts ascending
    spec.eigenvalues[k] = es.eigenvalues()(src);
    VecX v = es.eigenvectors().col(src);
    // back-transform to value space: e = D^{-1/2} v (weighted-orthonormal)
    for (int i = 0; i < total; ++i) v[i] /= std::sqrt(rule_B.weights[i / 3]);
    spec.eigenvectors.col(k) = v;
    Vec3 m = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) m[c] += rule_B.weights[i] * v[3 * i + c];
    spec.moments.col(k) = m;
    spec.coupling[k] = m.squaredNorm();
  }
  return spec;
}

double cluster_coupling(const NewtonSpectrum& spec, int n0, double rel_tol) {
  if (n0 < 0 || n0 >= spec.eigenvalues.size())
    throw ValidationError("cluster_coupling: mode index out of range");
  const double lam = spec.eigenvalues[n0];
  double s = 0.0;
  for (int k = 0; k < spec.eigenvalues.size(); ++k)
    if (std::abs(spec.eigenvalues[k] - lam) <= rel_tol * lam) s += spec.coupling[k];
  return s;
}

BlockOperator assemble_layer(const QuadratureRule& rule_bdry,
                             const QuadratureRule& rule_target,
                             const ElasticBackground& bg, LayerKind kind, double P) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("assemble_layer: boundary rule must carry normals");
  BlockOperator op;
  op.source_rule = rule_bdry;
  op.target_rule = rule_target;
  if (kind == LayerKind::Single)
    op.mat = phi_kernel_matrix(rule_target.nodes, rule_bdry, bg, P, true);
  else
    op.mat = dl_matrix(rule_target.nodes, rule_bdry, bg, P);
  return op;
}

CMatX single_layer_on_surface(const QuadratureRule& rule_bdry, const ElasticBackground& bg,
                              double P) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("single_layer_on_surface: boundary rule required");
  const std::size_t n = rule_bdry.size();
  CMatX M(3 * n, 3 * n);
  const double g1 = bg.gamma1(), g2 = bg.gamma2();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        // flat equivalent-disc correction: ∫_disc kernel dA with R = sqrt(w/pi)
        const double R = std::sqrt(rule_bdry.weights[i] / kPi);
        const Vec3 nu = rule_bdry.normals[i];
        CMat3 diag;
        if (P > 0.0) {
          diag = yukawa_disc_integral(bg, P, R, nu);
        } else {
          Mat3 tang = Mat3::Identity() - nu * nu.transpose();
          diag = ((g1 / (4.0 * kPi)) * (2.0 * kPi * R) * Mat3::Identity() +
                  (g2 / (4.0 * kPi)) * (kPi * R) * tang)
                     .cast<Complex>();
        }
        put_block(M, i, j, diag);
      } else {
        put_block(M, i, j,
                  rule_bdry.weights[j] *
                      phi_kernel(bg, P, rule_bdry.nodes[i], rule_bdry.nodes[j]));
      }
    }
  }
  return M;
}

std::shared_ptr<NeumannPoincare> neumann_poincare(const QuadratureRule& rule_bdry,
                                                  const ElasticBackground& bg, double P) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("neumann_poincare: boundary rule required");
  if (P < 0.0) throw ValidationError("neumann_poincare: shift P must be >= 0");
  const std::size_t n = rule_bdry.size();

  // Kernel-only matrix (static part + bounded P-difference); the static
  // diagonal is filled by the Gauss identity DL[const] = -const inside, i.e.
  // the principal-value row sums satisfy K[const] = -const/2.
  CMatX kernel(3 * n, 3 * n);
  std::vector<CMat3> row_sum(n, CMat3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      CMat3 t0 = kelvin_traction_y(rule_bdry.nodes[i], rule_bdry.nodes[j],
                                   rule_bdry.normals[j], bg)
                     .cast<Complex>();
      row_sum[i] += rule_bdry.weights[j] * t0;
      CMat3 t = t0;
      if (P > 0.0) {
        auto [kp, ks] = shift_k(bg, P);
        t += kupradze_traction_y_k(rule_bdry.nodes[i], rule_bdry.nodes[j],
                                   rule_bdry.normals[j], bg, kp, ks) -
             t0;
      }
      put_block(kernel, i, j, t);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    CMat3 diag = (-0.5 * Mat3::Identity()).cast<Complex>() - row_sum[i];
    put_block(kernel, i, i, diag / rule_bdry.weights[i]);
  }

  auto np = std::make_shared<NeumannPoincare>();
  np->rule = rule_bdry;
  np->P = P;
  CMatX dw = CMatX::Zero(3 * n, 3 * n);
  for (std::size_t j = 0; j < n; ++j)
    for (int c = 0; c < 3; ++c) dw(3 * j + c, 3 * j + c) = rule_bdry.weights[j];
  np->K = kernel * dw;
  np->Kstar = kernel.transpose() * dw;  // weighted adjoint: D^{-1} K^T D
  CMatX half = 0.5 * CMatX::Identity(3 * n, 3 * n);
  np->half_plus_K.compute(half + np->K);
  np->half_plus_Kstar.compute(half + np->Kstar);
  return np;
}

double np_min_singular_value(const NeumannPoincare& np) {
  CMatX m = 0.5 * CMatX::Identity(np.K.rows(), np.K.cols()) + np.K;
  Eigen::BDCSVD<CMatX> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

CVecX ShiftedSingleLayer::density(const CVecX& f_values) const {
  return np->half_plus_Kstar.solve(f_values);
}

std::vector<CVec3> ShiftedSingleLayer::evaluate(const CVecX& f_values,
                                                const std::vector<Vec3>& targets) const {
  const CVecX phi = density(f_values);
  std::vector<CVec3> out(targets.size(), CVec3::Zero());
  const auto& rule = np->rule;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    CVec3 acc = CVec3::Zero();
    for (std::size_t j = 0; j < rule.size(); ++j) {
      CMat3 k = phi_kernel(bg, P, targets[t], rule.nodes[j]);
      acc += rule.weights[j] * (k * phi.segment<3>(3 * j));
    }
    out[t] = acc;
  }
  return out;
}

CVecX ShiftedSingleLayer::trace(const CVecX& f_values) const {
  return sl_on * density(f_values);
}

ShiftedSingleLayer make_shifted_single_layer(const QuadratureRule& rule_bdry,
                                             const ElasticBackground& bg, double P) {
  ShiftedSingleLayer sl;
  sl.np = neumann_poincare(rule_bdry, bg, P);
  sl.bg = bg;
  sl.P = P;
  sl.sl_on = single_layer_on_surface(rule_bdry, bg, P);
  return sl;
}

NPOperator assemble_np(const QuadratureRule& rule_vol, const QuadratureRule& rule_bdry,
                       const ElasticBackground& bg, double p2) {
  if (!(p2 > 0.0)) throw ValidationError("assemble_np: p2 must be > 0");
  const double P = std::sqrt(p2);
  auto np = neumann_poincare(rule_bdry, bg, P);

  // gamma Gamma_P(b, v) = (1/2 I + K)^{-1} gamma Phi(b, v)   (kernel values)
  CMatX phi_bv = phi_kernel_matrix(rule_bdry.nodes, rule_vol, bg, P, false);
  CMatX trace_kernel = np->half_plus_K.solve(phi_bv);

  // N^P = [Phi_vv_corrected - DL_vb * traceKernel] * D_w
  CMatX phi_vv = newtonian_matrix(rule_vol, bg, P);  // weights folded
  std::vector<CMat3> dl_one(rule_vol.size());
  for (std::size_t i = 0; i < rule_vol.size(); ++i) {
    CMat3 mp = CMat3::Zero();  // M_P(x_i) = row sum of the Newtonian matrix
    for (std::size_t j = 0; j < rule_vol.size(); ++j)
      mp += phi_vv.block<3, 3>(3 * i, 3 * j);
    dl_one[i] = p2 * mp - CMat3::Identity();
  }
  CMatX dl_vb = dl_matrix_inside(rule_vol.nodes, rule_bdry, bg, P, &dl_one);
  CMatX correction = dl_vb * trace_kernel;  // kernel values (x_v, y_v)
  for (Eigen::Index c = 0; c < correction.cols(); ++c)
    correction.col(c) *= rule_vol.weights[c / 3];

  NPOperator out;
  out.p2 = p2;
  out.op.source_rule = rule_vol;
  out.op.target_rule = rule_vol;
  out.op.mat = phi_vv - correction;
  out.trace.source_rule = rule_vol;
  out.trace.target_rule = rule_bdry;
  out.trace.mat = trace_kernel;
  for (Eigen::Index c = 0; c < out.trace.mat.cols(); ++c)
    out.trace.mat.col(c) *= rule_vol.weights[c / 3];
  return out;
}

// ---------------------------------------------------------------------------
// Neumann Green tensor with correction R (§5.7 representation).
// ---------------------------------------------------------------------------

struct NeumannGreen::Impl {
  QuadratureRule vol, bdry;
  ElasticBackground bg;
  double omega = 0.0;
  std::vector<double> rho_vals;

  CMatX slon_bb;    // on-surface static SL (weights folded)
  CMatX slw_vb;     // SL boundary -> volume targets (weights folded)
  CMatX dlw_vb;     // DL boundary -> volume targets (weights folded)
  CMatX nw_bv_rho;  // Newtonian volume -> boundary targets, rho folded
  CMatX nw_vv_rho;  // Newtonian volume -> volume targets (corrected diag), rho folded
  // least-squares factor: for omega = 0, rho = 0 the boundary block is
  // singular on constants (R is only defined up to rigid constants there)
  Eigen::CompleteOrthogonalDecomposition<CMatX> lu;

  struct SourceData {
    CMatX rb;  // 3Nb x 3
    CMatX rv;  // 3Nv x 3
  };
  std::map<std::array<double, 3>, SourceData> cache;

  // traction data t_y(z_b) = ∂_{ν_z} Γ⁰(z_b, y), one 3x3 block per node
  CMatX traction_data(const Vec3& y) const {
    CMatX t(3 * bdry.size(), 3);
    for (std::size_t i = 0; i < bdry.size(); ++i)
      t.block<3, 3>(3 * i, 0) =
          kelvin_traction_x(bdry.nodes[i], bdry.normals[i], y, bg).cast<Complex>();
    return t;
  }

  CMatX gamma0_volume(const Vec3& y) const {
    CMatX g(3 * vol.size(), 3);
    for (std::size_t i = 0; i < vol.size(); ++i) {
      if ((vol.nodes[i] - y).norm() < 1e-12)
        g.block<3, 3>(3 * i, 0) =
            kelvin_self_integral(bg, vol.weights[i]) / vol.weights[i];
      else
        g.block<3, 3>(3 * i, 0) = kelvin_tensor(vol.nodes[i], y, bg).cast<Complex>();
    }
    return g;
  }

  const SourceData& correction_for(const Vec3& y) {
    for (const auto& zb : bdry.nodes)
      if ((zb - y).norm() < 1e-9)
        throw ValidationError("NeumannGreen: source point on the boundary");
    std::array<double, 3> key{y[0], y[1], y[2]};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const CMatX t = traction_data(y);
    const CMatX g0v = gamma0_volume(y);
    const double w2 = omega * omega;
    CMatX rhs(slon_bb.rows() + slw_vb.rows(), 3);
    rhs.topRows(slon_bb.rows()) = -slon_bb * t + w2 * nw_bv_rho * g0v;
    rhs.bottomRows(slw_vb.rows()) = -slw_vb * t + w2 * nw_vv_rho * g0v;
    CMatX sol = lu.solve(rhs);
    SourceData sd;
    sd.rb = sol.topRows(slon_bb.rows());
    sd.rv = sol.bottomRows(slw_vb.rows());
    auto [pos, inserted] = cache.emplace(key, std::move(sd));
    return pos->second;
  }

  // representation evaluation at arbitrary interior x
  CMat3 eval_R(const Vec3& x, const Vec3& y) {
    const SourceData& sd = correction_for(y);
    const double w2 = omega * omega;
    CMat3 acc = CMat3::Zero();
    // nearest boundary node for the DL singularity subtraction
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::max();
    for (std::size_t j = 0; j < bdry.size(); ++j) {
      const double d = (x - bdry.nodes[j]).squaredNorm();
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    if (best < 1e-24) return sd.rb.block<3, 3>(3 * nearest, 0);  // solved trace
    const CMat3 r_near = sd.rb.block<3, 3>(3 * nearest, 0);
    // -SL[t_y](x) - DL[R_b](x), DL via DL[R - R*] - R*
    acc += r_near;  // -(-R*)
    for (std::size_t j = 0; j < bdry.size(); ++j) {
      CMat3 slk = kelvin_tensor(x, bdry.nodes[j], bg).cast<Complex>();
      CMat3 dlk = kelvin_traction_y(x, bdry.nodes[j], bdry.normals[j], bg).cast<Complex>();
      CMat3 tblk = kelvin_traction_x(bdry.nodes[j], bdry.normals[j], y, bg).cast<Complex>();
      acc -= bdry.weights[j] * (slk * tblk);
      acc -= bdry.weights[j] * (dlk * (sd.rb.block<3, 3>(3 * j, 0) - r_near));
    }
    // + w2 N[rho (R + Γ⁰)(·, y)](x)
    for (std::size_t j = 0; j < vol.size(); ++j) {
      CMat3 g0j;
      const bool self = (vol.nodes[j] - x).norm() < 1e-12;
      if (self)
        g0j = kelvin_self_integral(bg, vol.weights[j]) / vol.weights[j];
      else
        g0j = kelvin_tensor(x, vol.nodes[j], bg).cast<Complex>();
      CMat3 g0_src;
      if ((vol.nodes[j] - y).norm() < 1e-12)
        g0_src = kelvin_self_integral(bg, vol.weights[j]) / vol.weights[j];
      else
        g0_src = kelvin_tensor(vol.nodes[j], y, bg).cast<Complex>();
      acc += w2 * vol.weights[j] * rho_vals[j] *
             (g0j * (sd.rv.block<3, 3>(3 * j, 0) + g0_src));
    }
    return acc;
  }

  // interior Neumann problem (L + ω²ρ) S = 0, ∂_ν S = g, via the same
  // factored block system; representation evaluation at interior targets
  std::vector<CVec3> neumann_solve(const CVecX& g, const std::vector<Vec3>& targets) {
    const std::size_t nb = bdry.size(), nv = vol.size();
    if (g.size() != static_cast<Eigen::Index>(3 * nb))
      throw ValidationError("neumann_solve: data size does not match the boundary rule");
    CVecX rhs(3 * (nb + nv));
    rhs.head(3 * nb) = slon_bb * g;
    rhs.tail(3 * nv) = slw_vb * g;
    const CVecX sol = lu.solve(rhs);
    const CVecX sb = sol.head(3 * nb);
    const CVecX sv = sol.tail(3 * nv);
    const double w2 = omega * omega;

    // S(x) = SL⁰[g](x) − DL⁰[S_b](x) + ω² N⁰[ρ S_v](x)
    std::vector<CVec3> out(targets.size(), CVec3::Zero());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Vec3& x = targets[t];
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::max();
      for (std::size_t j = 0; j < nb; ++j) {
        const double d = (x - bdry.nodes[j]).squaredNorm();
        if (d < best) {
          best = d;
          nearest = j;
        }
      }
      if (best < 1e-24) {
        out[t] = sb.segment<3>(3 * nearest);
        continue;
      }
      const CVec3 s_near = sb.segment<3>(3 * nearest);
      CVec3 acc = s_near;  // −DL[S*] with DL[1] = −I inside
      for (std::size_t j = 0; j < nb; ++j) {
        const CMat3 slk = kelvin_tensor(x, bdry.nodes[j], bg).cast<Complex>();
        const CMat3 dlk =
            kelvin_traction_y(x, bdry.nodes[j], bdry.normals[j], bg).cast<Complex>();
        acc += bdry.weights[j] * (slk * CVec3(g.segment<3>(3 * j)));
        acc -= bdry.weights[j] * (dlk * CVec3(sb.segment<3>(3 * j) - s_near));
      }
      for (std::size_t j = 0; j < nv; ++j) {
        CMat3 g0j;
        if ((vol.nodes[j] - x).norm() < 1e-12)
          g0j = kelvin_self_integral(bg, vol.weights[j]) / vol.weights[j];
        else
          g0j = kelvin_tensor(x, vol.nodes[j], bg).cast<Complex>();
        acc += w2 * vol.weights[j] * rho_vals[j] * (g0j * CVec3(sv.segment<3>(3 * j)));
      }
      out[t] = acc;
    }
    return out;
  }
};

NeumannGreen::NeumannGreen(const ElasticBackground& bg, GreenMode mode)
    : mode_(mode), bg_(bg) {
  if (mode != GreenMode::FreeSpace)
    throw ValidationError("NeumannGreen: corrected mode needs rules and density");
}

NeumannGreen::NeumannGreen(const QuadratureRule& rule_vol, const QuadratureRule& rule_bdry,
                           const ElasticBackground& bg, const DensitySampler& rho,
                           double omega)
    : mode_(GreenMode::Corrected), bg_(bg), omega_(omega) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("NeumannGreen: boundary rule required");
  impl_ = std::make_shared<Impl>();
  impl_->vol = rule_vol;
  impl_->bdry = rule_bdry;
  impl_->bg = bg;
  impl_->omega = omega;
  impl_->rho_vals.resize(rule_vol.size());
  for (std::size_t i = 0; i < rule_vol.size(); ++i)
    impl_->rho_vals[i] = rho(rule_vol.nodes[i]);

  const std::size_t nb = rule_bdry.size(), nv = rule_vol.size();
  impl_->slon_bb = single_layer_on_surface(rule_bdry, bg, 0.0);
  impl_->slw_vb = phi_kernel_matrix(rule_vol.nodes, rule_bdry, bg, 0.0, true);
  impl_->dlw_vb = dl_matrix_inside(rule_vol.nodes, rule_bdry, bg, 0.0);
  // Newtonian matrices with rho and weights folded on the source side
  CMatX n_vv = newtonian_matrix(rule_vol, bg, 0.0);
  CMatX n_bv = phi_kernel_matrix(rule_bdry.nodes, rule_vol, bg, 0.0, true);
  impl_->nw_vv_rho = n_vv;
  impl_->nw_bv_rho = n_bv;
  for (std::size_t j = 0; j < nv; ++j) {
    impl_->nw_vv_rho.middleCols(3 * j, 3) *= impl_->rho_vals[j];
    impl_->nw_bv_rho.middleCols(3 * j, 3) *= impl_->rho_vals[j];
  }

  // block system:
  //   [ (1/2 I + K)      -w2 N_bv_rho ] [R_b]   [rhs_b]
  //   [  DL_vb        I - w2 N_vv_rho ] [R_v] = [rhs_v]
  auto np0 = neumann_poincare(rule_bdry, bg, 0.0);
  const double w2 = omega * omega;
  CMatX A = CMatX::Zero(3 * (nb + nv), 3 * (nb + nv));
  A.topLeftCorner(3 * nb, 3 * nb) = 0.5 * CMatX::Identity(3 * nb, 3 * nb) + np0->K;
  A.topRightCorner(3 * nb, 3 * nv) = -w2 * impl_->nw_bv_rho;
  A.bottomLeftCorner(3 * nv, 3 * nb) = impl_->dlw_vb;
  A.bottomRightCorner(3 * nv, 3 * nv) =
      CMatX::Identity(3 * nv, 3 * nv) - w2 * impl_->nw_vv_rho;
  impl_->lu.compute(A);
}

CMat3 NeumannGreen::R(const Vec3& x, const Vec3& y) const {
  if (mode_ == GreenMode::FreeSpace) return CMat3::Zero();
  return impl_->eval_R(x, y);
}

CMat3 NeumannGreen::gamma(const Vec3& x, const Vec3& y) const {
  CMat3 g0 = kelvin_tensor(x, y, bg_).cast<Complex>();
  if (mode_ == GreenMode::FreeSpace) return g0;
  return g0 + impl_->eval_R(x, y);
}

void NeumannGreen::prepare_sources(const std::vector<Vec3>& ys) const {
  if (mode_ == GreenMode::FreeSpace) return;
  for (const auto& y : ys) impl_->correction_for(y);
}

const QuadratureRule& NeumannGreen::boundary_rule() const {
  if (mode_ == GreenMode::FreeSpace)
    throw ValidationError("NeumannGreen: no boundary rule in free-space mode");
  return impl_->bdry;
}

std::vector<CVec3> NeumannGreen::neumann_solve(const CVecX& g,
                                               const std::vector<Vec3>& targets) const {
  if (mode_ == GreenMode::FreeSpace)
    throw ValidationError("NeumannGreen: neumann_solve needs the corrected mode");
  return impl_->neumann_solve(g, targets);
}

}  // namespace ecl
