#include "ecl/linearization.hpp"

#include <Eigen/LU>
#include <json.hpp>
#include <cmath>

#include "ecl/errors.hpp"
#include "ecl/kernels.hpp"

namespace ecl {

namespace {

CVecX scale_by_rho(const QuadratureRule& rule, const DensitySampler& rho,
                   const CVecX& u) {
  CVecX out = u;
  for (std::size_t i = 0; i < rule.size(); ++i)
    out.segment<3>(3 * i) *= rho(rule.nodes[i]);
  return out;
}

}  // namespace

QfField solve_qf(const CVecX& f, double p2, const ElasticBackground& bg,
                 const QuadratureRule& rule_bdry, const QuadratureRule& rule_vol) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("solve_qf: rule_bdry is not a boundary rule");
  if (f.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("solve_qf: f size does not match rule_bdry");
  if (!(p2 > 0.0)) throw ValidationError("solve_qf: p2 must be > 0");

  ShiftedSingleLayer sl = make_shifted_single_layer(rule_bdry, bg, std::sqrt(p2));
  QfField out;
  out.volume.rule = rule_vol;
  out.volume.values = sl.evaluate(f, rule_vol.nodes);
  out.rule_bdry = rule_bdry;
  out.trace = sl.trace(f);
  return out;
}

VolumeField solve_wqf(const VolumeField& qf, const DensitySampler& rho,
                      const NPOperator& np) {
  if (!rho) throw ValidationError("solve_wqf: missing density sampler");
  if (rule_hash(qf.rule) != rule_hash(np.op.source_rule))
    throw ValidationError("solve_wqf: qf rule does not match np source rule");
  VolumeField w;
  w.rule = qf.rule;
  w.values = unpack_field(np.op.apply(scale_by_rho(qf.rule, rho, qf.packed())));
  return w;
}

CVec3 np_value_at(const NPOperator& np, const ElasticBackground& bg, const CVecX& m,
                  const Vec3& x) {
  const auto& vol = np.op.source_rule;
  const auto& bdry = np.trace.target_rule;
  if (m.size() != static_cast<Eigen::Index>(3 * vol.size()))
    throw ValidationError("np_value_at: field size does not match volume rule");
  const double P = std::sqrt(np.p2);
  const Complex kp = Complex(0.0, P / std::sqrt(bg.lambda + 2.0 * bg.mu));
  const Complex ks = Complex(0.0, P / std::sqrt(bg.mu));

  CVec3 acc = CVec3::Zero();
  for (std::size_t j = 0; j < vol.size(); ++j)
    acc += vol.weights[j] * (yukawa_tensor(x, vol.nodes[j], bg, P) * m.segment<3>(3 * j));
  const CVecX h = np.trace.apply(m);  // boundary trace = DL density of the correction
  for (std::size_t b = 0; b < bdry.size(); ++b)
    acc -= bdry.weights[b] * (kupradze_traction_y_k(x, bdry.nodes[b], bdry.normals[b],
                                                    bg, kp, ks) *
                              h.segment<3>(3 * b));
  return acc;
}

double series_eta(const NPOperator& np, const DensitySampler& rho, double omega) {
  if (!rho) throw ValidationError("series_eta: missing density sampler");
  double rho_max = 0.0;
  for (const auto& y : np.op.source_rule.nodes)
    rho_max = std::max(rho_max, std::abs(rho(y)));
  return omega * omega * rho_max * weighted_operator_norm(np.op);
}

double h_half_surrogate(const QuadratureRule& rule_bdry, const CVecX& u) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("h_half_surrogate: not a boundary rule");
  if (u.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("h_half_surrogate: field size does not match rule");

  double acc = 0.0;
  for (std::size_t i = 0; i < rule_bdry.size(); ++i)
    acc += rule_bdry.weights[i] * u.segment<3>(3 * i).squaredNorm();

  for (const auto& patch : rule_bdry.patches) {
    auto at = [&](int r, int c) { return patch.offset + r * patch.cols + c; };
    for (int r = 0; r < patch.rows; ++r)
      for (int c = 0; c < patch.cols; ++c) {
        const int i = at(r, c);
        for (int d = 0; d < 2; ++d) {
          const int j = (d == 0) ? (r + 1 < patch.rows ? at(r + 1, c) : -1)
                                 : (c + 1 < patch.cols ? at(r, c + 1) : -1);
          if (j < 0) continue;
          const double ds = (rule_bdry.nodes[j] - rule_bdry.nodes[i]).norm();
          if (ds <= 0.0) continue;
          const double dgrad =
              (u.segment<3>(3 * j) - u.segment<3>(3 * i)).squaredNorm() / (ds * ds);
          acc += rule_bdry.weights[i] * dgrad;
        }
      }
  }
  return std::sqrt(acc);
}

LinearizedRecord linearization_check(const CVecX& f, const LinearizationSetup& setup) {
  if (!setup.rho) throw ValidationError("linearization_check: missing density sampler");
  if (!(setup.omega > 0.0))
    throw ValidationError("linearization_check: omega must be > 0");

  NPOperator np = assemble_np(setup.rule_vol, setup.rule_bdry, setup.bg, setup.p2);

  LinearizedRecord rec;
  rec.p2 = setup.p2;
  rec.eta = series_eta(np, setup.rho, setup.omega);
  if (!(rec.eta < 1.0))
    throw ValidationError("linearization_check: geometric series diverges (eta >= 1)");

  rec.qf = solve_qf(f, setup.p2, setup.bg, setup.rule_bdry, setup.rule_vol);
  rec.wqf = solve_wqf(rec.qf.volume, setup.rho, np);

  // full effective solve q = Q^f + omega^2 N^P(rho q)
  const double w2 = setup.omega * setup.omega;
  const Eigen::Index n = 3 * static_cast<Eigen::Index>(setup.rule_vol.size());
  CMatX a = CMatX::Identity(n, n);
  for (std::size_t j = 0; j < setup.rule_vol.size(); ++j)
    a.middleCols(3 * j, 3) -=
        (w2 * setup.rho(setup.rule_vol.nodes[j])) * np.op.mat.middleCols(3 * j, 3);
  CVecX q = Eigen::PartialPivLU<CMatX>(a).solve(rec.qf.volume.packed());
  if (!q.allFinite())
    throw NumericalError("linearization_check: effective solve failed");

  // Lambda_P(f) - gamma(Q^f) = omega^2 gamma N^P(rho q), with no cancellation
  rec.boundary_lhs = w2 * np.trace.apply(scale_by_rho(setup.rule_vol, setup.rho, q));
  rec.boundary_rhs =
      w2 * np.trace.apply(scale_by_rho(setup.rule_vol, setup.rho, rec.qf.volume.packed()));
  rec.remainder_norm = h_half_surrogate(setup.rule_bdry, rec.boundary_lhs - rec.boundary_rhs);
  return rec;
}

std::string linearization_json(const LinearizedRecord& rec, double f_norm) {
  nlohmann::json j;
  j["p2"] = rec.p2;
  j["eta"] = rec.eta;
  j["remainder_norm"] = rec.remainder_norm;
  j["remainder_times_p4"] =
      f_norm > 0.0 ? rec.remainder_norm * rec.p2 * rec.p2 / f_norm : 0.0;
  return j.dump(2);
}

}  // namespace ecl
