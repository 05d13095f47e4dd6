#include "ecl/resonance.hpp"

#include <sstream>

#include <Eigen/LU>

namespace ecl {

namespace {

// indices of the degenerate eigenvalue cluster containing n0
std::vector<int> cluster_indices(const NewtonSpectrum& spec, int n0, double rel_tol) {
  std::vector<int> idx;
  const double lam = spec.eigenvalues[n0];
  for (int n = 0; n < spec.eigenvalues.size(); ++n)
    if (std::abs(spec.eigenvalues[n] - lam) <= rel_tol * std::abs(lam)) idx.push_back(n);
  return idx;
}

}  // namespace

FrequencySetting tune_frequency(const NewtonSpectrum& spec_B, int n0, double c_n0,
                                double a, double h, double rho_tilde1) {
  if (n0 < 0 || n0 >= spec_B.eigenvalues.size())
    throw ValidationError("tune_frequency: mode index n0 out of computed range");
  if (!(c_n0 < 0.0))
    throw ValidationError("tune_frequency: tuning constant c_n0 must be negative");
  if (!(h > 1.0 / 3.0 && h < 1.0))
    throw ValidationError("tune_frequency: exponent h must satisfy 1/3 < h < 1");
  if (!(a > 0.0)) throw ValidationError("tune_frequency: a must be > 0");
  if (!(rho_tilde1 > 0.0)) throw ValidationError("tune_frequency: rho_tilde1 must be > 0");
  const double lam = spec_B.eigenvalues[n0];
  if (!(lam > 0.0)) throw ValidationError("tune_frequency: lambda_{n0}^B must be > 0");

  FrequencySetting st;
  st.n0 = n0;
  st.c_n0 = c_n0;
  st.h = h;
  st.a = a;
  st.rho_tilde1 = rho_tilde1;
  st.lambda_n0_B = lam;
  return st;
}

double effective_coupling(const NewtonSpectrum& spec_B, int n0) {
  if (n0 < 0 || n0 >= spec_B.eigenvalues.size())
    throw ValidationError("effective_coupling: mode index n0 out of computed range");
  const auto idx = cluster_indices(spec_B, n0, 1e-3);
  double s = 0.0;
  for (int n : idx) s += spec_B.coupling[n];
  return s / static_cast<double>(idx.size());
}

double effective_p2(const NewtonSpectrum& spec_B, int n0, double c_n0) {
  if (!(c_n0 < 0.0))
    throw ValidationError("effective_p2: tuning constant c_n0 must be negative");
  const double s = effective_coupling(spec_B, n0);
  if (s < 1e-12)
    throw ValidationError(
        "effective_p2: mode n0 has (numerically) zero coupling <I; e_n0>; "
        "choose a coupled mode");
  return -s / (spec_B.eigenvalues[n0] * c_n0);
}

Mat3 WField::integral() const {
  Mat3 s = Mat3::Zero();
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * values[i];
  return s;
}

double WField::l2_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    s += rule.weights[i] * values[i].squaredNorm();
  return std::sqrt(s);
}

WField solve_w(const QuadratureRule& rule_Dm, const FrequencySetting& setting,
               const ElasticBackground& bg) {
  if (rule_Dm.is_boundary())
    throw ValidationError("solve_w: expects a volume rule on the inclusion");
  const double gap = std::abs(setting.gap_at_n0());
  if (gap < 1e-12) {
    std::ostringstream os;
    os << "solve_w: resolvent gap |c_n0| a^h = " << gap
       << " below 1e-12; system is numerically singular";
    throw NumericalError(os.str());
  }

  const auto newton = assemble_newtonian(rule_Dm, bg);
  const Eigen::Index n3 = newton.mat.rows();
  MatX A = -newton.mat.real();
  const double mu_inv = 1.0 / (setting.omega_sq() * setting.rho1());
  for (Eigen::Index i = 0; i < n3; ++i) A(i, i) += mu_inv;

  MatX rhs = MatX::Zero(n3, 3);
  for (Eigen::Index i = 0; i < n3 / 3; ++i) rhs.block<3, 3>(3 * i, 0).setIdentity();
  const MatX sol = A.partialPivLu().solve(rhs);
  if (!sol.allFinite()) throw NumericalError("solve_w: dense solve produced non-finite values");

  WField w;
  w.rule = rule_Dm;
  w.values.resize(static_cast<std::size_t>(n3 / 3));
  for (Eigen::Index i = 0; i < n3 / 3; ++i) w.values[i] = sol.block<3, 3>(3 * i, 0);
  return w;
}

double scattering_alpha(const WField& w) { return w.integral().trace() / 3.0; }

std::vector<Complex> beta_coefficients(const ClusterGeometry& cluster,
                                       const WField& w_ref, const NeumannGreen& green) {
  if (cluster.centers.empty())
    throw ValidationError("beta_coefficients: empty cluster");
  if (w_ref.values.size() != w_ref.rule.size())
    throw ValidationError("beta_coefficients: malformed W field");
  double max_r = 0.0;
  for (const auto& x : w_ref.rule.nodes) max_r = std::max(max_r, x.norm());
  if (max_r > 1.01 * cluster.a)
    throw ValidationError(
        "beta_coefficients: reference W rule must be centered at the origin "
        "with radius a");

  std::vector<Complex> beta(cluster.M());
  if (green.mode() == GreenMode::FreeSpace) {
    std::fill(beta.begin(), beta.end(), Complex(1.0, 0.0));
    return beta;
  }

  green.prepare_sources(cluster.centers);
  for (std::size_t m = 0; m < cluster.M(); ++m) {
    const Vec3& z = cluster.centers[m];
    CMat3 acc = CMat3::Zero();
    for (std::size_t i = 0; i < w_ref.rule.size(); ++i)
      acc += w_ref.rule.weights[i] *
             (w_ref.values[i].cast<Complex>() * green.R(z + w_ref.rule.nodes[i], z));
    beta[m] = 1.0 - acc.trace() / 3.0;
    if (!(std::abs(beta[m]) > 0.5)) {
      std::ostringstream os;
      os << "beta_coefficients: |beta_" << m << "| = " << std::abs(beta[m])
         << " <= 0.5; the interaction system divides by beta";
      throw NumericalError(os.str());
    }
  }
  return beta;
}

}  // namespace ecl
