#include "ecl/foldy_lax.hpp"

#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "ecl/kernels.hpp"

namespace ecl {

double VolumeField::l2_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    s += rule.weights[i] * values[i].squaredNorm();
  return std::sqrt(s);
}

VolumeField background_field(Domain domain, const CVecX& g,
                             const QuadratureRule& rule_bdry,
                             const NeumannGreen& green,
                             const std::vector<Vec3>& targets) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("background_field: density rule must be a boundary rule");
  if (g.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("background_field: density size does not match the rule");
  for (const auto& x : targets)
    if (!(distance_to_boundary(domain, x) > 1e-12))
      throw ValidationError(
          "background_field: targets must lie strictly inside the domain");

  VolumeField out;
  out.rule.nodes = targets;
  out.rule.weights.assign(targets.size(), 1.0);
  if (green.mode() == GreenMode::Corrected) {
    // ∫_∂Ω Γ(x, y) g(y) dσ is the interior Neumann solution with data g;
    // the direct block solve avoids boundary-pole evaluations of R.
    if (rule_hash(rule_bdry) != rule_hash(green.boundary_rule()))
      throw ValidationError(
          "background_field: density rule must match the boundary rule of the "
          "corrected Green tensor");
    out.values = green.neumann_solve(g, targets);
    return out;
  }
  out.values.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    CVec3 acc = CVec3::Zero();
    for (std::size_t j = 0; j < rule_bdry.size(); ++j)
      acc += rule_bdry.weights[j] *
             (green.gamma(targets[t], rule_bdry.nodes[j]) * CVec3(g.segment<3>(3 * j)));
    out.values[t] = acc;
  }
  return out;
}

FoldyLaxSystem assemble_system(const ClusterGeometry& cluster,
                               const NeumannGreen& green, double p2,
                               const std::vector<Complex>& beta,
                               const std::vector<CVec3>& s_at_centers) {
  const std::size_t M = cluster.M();
  if (M == 0) throw ValidationError("assemble_system: empty cluster");
  if (beta.size() != M || s_at_centers.size() != M)
    throw ValidationError("assemble_system: beta / S sizes must match the cluster");
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t j = m + 1; j < M; ++j)
      if ((cluster.centers[m] - cluster.centers[j]).norm() < 1e-12)
        throw ValidationError("assemble_system: coincident inclusion centers");

  const double coeff = p2 * std::pow(cluster.a, 1.0 - cluster.h);
  green.prepare_sources(cluster.centers);

  FoldyLaxSystem sys;
  sys.centers = cluster.centers;
  sys.matrix = CMatX::Identity(3 * M, 3 * M);
  sys.rhs = pack_field(s_at_centers);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t j = 0; j < M; ++j) {
      if (j == m) continue;
      sys.matrix.block<3, 3>(3 * m, 3 * j) =
          green.gamma(cluster.centers[m], cluster.centers[j]) * (coeff / beta[j]);
    }
  return sys;
}

FoldyLaxSolution solve_system(const FoldyLaxSystem& system) {
  if (system.matrix.rows() == 0) throw ValidationError("solve_system: empty system");
  Eigen::BDCSVD<CMatX> svd(system.matrix,
                           Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 1e-14 * smax)) {
    std::ostringstream os;
    os << "solve_system: system matrix is numerically singular (condition "
       << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity()) << ")";
    throw NumericalError(os.str());
  }
  CVecX y = svd.solve(system.rhs);
  FoldyLaxSolution sol;
  sol.y = unpack_field(y);
  sol.condition = smax / smin;
  sol.residual = (system.matrix * y - system.rhs).norm() / system.rhs.norm();
  return sol;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// ∫_{|y−c| < Rb} Γ⁰(z, y) dy in closed form for |z − c| < Rb; reduces to the
// equivalent-ball diagonal correction at z = c.
CMat3 kelvin_ball_integral(const ElasticBackground& bg, double Rb, const Vec3& d) {
  const double s2 = d.squaredNorm();
  const double g1 = bg.gamma1() / (4.0 * kPi);
  const double g2 = bg.gamma2() / (4.0 * kPi);
  Mat3 m = g1 * 2.0 * kPi * (Rb * Rb - s2 / 3.0) * Mat3::Identity();
  m += g2 * (2.0 * kPi * Rb * Rb / 3.0 - 2.0 * kPi * s2 / 5.0) * Mat3::Identity();
  m += g2 * (8.0 * kPi / 15.0) * (d * d.transpose());
  return m.cast<Complex>();
}

// Γ(z_i, y_j) w_j over a volume rule: Kelvin part with corrected self cells
// from the Newtonian assembly, plus the smooth correction R in corrected mode.
CMatX lse_kernel_matrix(double p2, const NeumannGreen& green,
                        const QuadratureRule& rule_vol) {
  const auto newton = assemble_newtonian(rule_vol, green.background());
  CMatX K = newton.mat;
  if (green.mode() == GreenMode::Corrected) {
    green.prepare_sources(rule_vol.nodes);
    for (std::size_t i = 0; i < rule_vol.size(); ++i)
      for (std::size_t j = 0; j < rule_vol.size(); ++j)
        K.block<3, 3>(3 * i, 3 * j) +=
            rule_vol.weights[j] * green.R(rule_vol.nodes[i], rule_vol.nodes[j]);
  }
  (void)p2;
  return K;
}

}  // namespace

VolumeField solve_continuous_lse(double p2, const NeumannGreen& green,
                                 const QuadratureRule& rule_vol,
                                 const VolumeField& s) {
  if (rule_vol.is_boundary())
    throw ValidationError("solve_continuous_lse: expects a volume rule");
  if (s.values.size() != rule_vol.size())
    throw ValidationError("solve_continuous_lse: S field does not match the rule");

  const Eigen::Index n3 = static_cast<Eigen::Index>(3 * rule_vol.size());
  CMatX A = CMatX::Identity(n3, n3) + p2 * lse_kernel_matrix(p2, green, rule_vol);
  Eigen::PartialPivLU<CMatX> lu(A);
  CVecX y = lu.solve(s.packed());
  if (!y.allFinite())
    throw NumericalError("solve_continuous_lse: dense solve produced non-finite values");

  VolumeField out;
  out.rule = rule_vol;
  out.values = unpack_field(y);
  return out;
}

CVec3 lse_value_at(const VolumeField& y_cont, double p2, const NeumannGreen& green,
                   const Vec3& z, const CVec3& s_at_z) {
  const auto& rule = y_cont.rule;
  if (rule.size() == 0 || y_cont.values.size() != rule.size())
    throw ValidationError("lse_value_at: malformed solved field");
  const auto& bg = green.background();

  // singularity subtraction about the nearest node: the 1/r kernel only
  // multiplies Y(y_q) − Y*, and the smooth moment ∫ Γ⁰(z, y) dy uses the
  // closed-form equivalent-ball integral on the nearest cell
  std::size_t qn = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double d2 = (z - rule.nodes[q]).squaredNorm();
    if (d2 < best) {
      best = d2;
      qn = q;
    }
  }
  const CVec3 y_near = y_cont.values[qn];
  CVec3 acc = CVec3::Zero();
  CMat3 m0 = CMat3::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    if (q == qn) continue;
    const CMat3 k = kelvin_tensor(z, rule.nodes[q], bg).cast<Complex>();
    acc += rule.weights[q] * (k * (y_cont.values[q] - y_near));
    m0 += rule.weights[q] * k;
  }
  const double req = std::cbrt(3.0 * rule.weights[qn] / (4.0 * kPi));
  const Vec3 d = z - rule.nodes[qn];
  if (d.norm() < req)
    m0 += kelvin_ball_integral(bg, req, d);
  else
    m0 += rule.weights[qn] * kelvin_tensor(z, rule.nodes[qn], bg).cast<Complex>();
  acc += m0 * y_near;

  if (green.mode() == GreenMode::Corrected) {
    green.prepare_sources(rule.nodes);
    for (std::size_t q = 0; q < rule.size(); ++q)
      acc += rule.weights[q] * (green.R(z, rule.nodes[q]) * y_cont.values[q]);
  }
  return s_at_z - p2 * acc;
}

double discrete_continuous_gap(const std::vector<CVec3>& ys,
                               const VolumeField& y_cont, double p2,
                               const NeumannGreen& green,
                               const std::vector<Vec3>& centers,
                               const std::vector<CVec3>& s_at_centers) {
  if (ys.size() != centers.size() || s_at_centers.size() != centers.size())
    throw ValidationError("discrete_continuous_gap: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < centers.size(); ++m) {
    const CVec3 yz = lse_value_at(y_cont, p2, green, centers[m], s_at_centers[m]);
    num += (ys[m] - yz).squaredNorm();
    den += yz.squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace ecl
