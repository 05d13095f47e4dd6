#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ecl/resonance.hpp"
#include "test_support.hpp"

using namespace ecl;

namespace {

const ElasticBackground kBg(1.0, 1.0, 1.0);

const QuadratureRule& base_rule() {
  static QuadratureRule r = inclusion_quadrature(Shape::Ball, 6);
  return r;
}

const NewtonSpectrum& ball_spectrum() {
  static NewtonSpectrum s = newton_spectrum(base_rule(), kBg, 10);
  return s;
}

// single-cell cluster descriptor around hand-placed centers (unit-ball domain)
ClusterGeometry manual_cluster(double h, double a, std::vector<Vec3> centers) {
  ClusterGeometry cg;
  cg.domain = Domain::Ball;
  cg.h = h;
  cg.a = a;
  cg.centers = std::move(centers);
  cg.cell_volume = std::pow(a, 1.0 - h);
  cg.d = std::pow(a, (1.0 - h) / 3.0);
  cg.kappa = 0.5 * cg.d;
  return cg;
}

// rho_tilde1 that puts the tuned omega exactly at omega_target
double rho_tilde_for_omega(const NewtonSpectrum& spec, double c, double a, double h,
                           double omega_target) {
  return (1.0 - c * std::pow(a, h)) /
         (omega_target * omega_target * spec.eigenvalues[0]);
}

}  // namespace

TEST_CASE("frequency tuning: gap identity and off-mode dichotomy") {
  const auto& spec = ball_spectrum();
  const double lam1 = spec.eigenvalues[0];
  CHECK(lam1 == doctest::Approx(0.3195540).epsilon(1e-5));

  auto st = tune_frequency(spec, 0, -1.0, 0.02, 0.75);
  CHECK(st.rho1() == doctest::Approx(1.0 / (0.02 * 0.02)).epsilon(1e-14));

  // gap at n0 equals c a^h to machine precision (discrete lambda^D = a^2 lambda^B)
  const double gap = st.gap(st.a * st.a * lam1);
  CHECK(std::abs(gap - st.c_n0 * std::pow(st.a, st.h)) < 1e-13);
  CHECK(std::abs(gap - st.gap_at_n0()) < 1e-13);

  // the identity is independent of the density scale rho_tilde1
  auto st2 = tune_frequency(spec, 0, -0.7, 0.02, 0.6, 7.3);
  CHECK(std::abs(st2.gap(st2.a * st2.a * lam1) - st2.gap_at_n0()) < 1e-13);

  // a -> 0 at fixed c: omega -> omega0
  for (double a : {1e-2, 1e-4, 1e-8}) {
    auto sta = tune_frequency(spec, 0, -1.0, a, 0.75);
    CHECK(std::abs(sta.omega_sq() / sta.omega0_sq() - 1.0) ==
          doctest::Approx(std::pow(a, 0.75)).epsilon(1e-12));
  }

  // off-cluster modes keep an O(1) gap: >= 10 |c| a^h at a = 0.02
  const double thresh = 10.0 * std::abs(st.c_n0) * std::pow(st.a, st.h);
  int checked = 0;
  for (int n = 0; n < spec.eigenvalues.size(); ++n) {
    if (std::abs(spec.eigenvalues[n] - lam1) < 1e-3 * lam1) continue;  // n0 cluster
    CHECK(std::abs(st.gap(st.a * st.a * spec.eigenvalues[n])) >= thresh);
    ++checked;
  }
  CHECK(checked >= 6);

  CHECK_THROWS_AS(tune_frequency(spec, -1, -1.0, 0.02, 0.75), ValidationError);
  CHECK_THROWS_AS(tune_frequency(spec, 10, -1.0, 0.02, 0.75), ValidationError);
  CHECK_THROWS_AS(tune_frequency(spec, 0, 1.0, 0.02, 0.75), ValidationError);
  CHECK_THROWS_AS(tune_frequency(spec, 0, -1.0, 0.02, 0.2), ValidationError);
  CHECK_THROWS_AS(tune_frequency(spec, 0, -1.0, 0.02, 1.5), ValidationError);
}

TEST_CASE("effective P2: normalization, linearity, coupled-mode guard") {
  const auto& spec = ball_spectrum();
  const double s_eff = effective_coupling(spec, 0);
  const double lam1 = spec.eigenvalues[0];

  // per-mode coupling of the top (triple) cluster; basis-independent average
  CHECK(s_eff == doctest::Approx(4.132918).epsilon(1e-4));

  // algebraic normalization c = -s/lambda -> P2 = 1
  CHECK(effective_p2(spec, 0, -s_eff / lam1) == doctest::Approx(1.0).epsilon(1e-14));

  // linear in 1/|c|
  const double p2 = effective_p2(spec, 0, -1.0);
  CHECK(p2 == doctest::Approx(12.9334).epsilon(1e-3));
  CHECK(effective_p2(spec, 0, -0.5) == doctest::Approx(2.0 * p2).epsilon(1e-14));

  // sign-invariance under e_n -> -e_n: coupling enters through |moment|^2
  double s_flipped = 0.0;
  int mult = 0;
  for (int n = 0; n < spec.eigenvalues.size(); ++n) {
    if (std::abs(spec.eigenvalues[n] - lam1) >= 1e-3 * lam1) continue;
    s_flipped += Vec3(-spec.moments.col(n)).squaredNorm();
    ++mult;
  }
  CHECK(s_flipped / mult == doctest::Approx(s_eff).epsilon(1e-14));

  // modes 3.. on the ball are moment-free (symmetry-killed): validation error
  CHECK(spec.coupling[3] < 1e-20);
  CHECK_THROWS_AS(effective_p2(spec, 3, -1.0), ValidationError);
  CHECK_THROWS_AS(effective_p2(spec, 0, 1.0), ValidationError);
}

TEST_CASE("W field: resonant scaling, alpha law, symmetry") {
  const auto& spec = ball_spectrum();
  const double h = 0.75, c = -1.0;
  const double p2 = effective_p2(spec, 0, c);

  std::vector<double> as{0.04, 0.02, 0.01}, norms;
  for (double a : as) {
    auto st = tune_frequency(spec, 0, c, a, h);
    auto rule = scaled_rule(base_rule(), Vec3(0.1, -0.05, 0.2), a);
    auto w = solve_w(rule, st, kBg);
    norms.push_back(w.l2_norm());

    const double alpha = scattering_alpha(w);
    CHECK(alpha < 0.0);
    // alpha = -P2 a^{1-h} + O(a^h) corrections
    CHECK(std::abs(alpha / (-p2 * std::pow(a, 1.0 - h)) - 1.0) < 0.10);

    // integral of W is isotropic for the octahedrally symmetric ball rule
    const Mat3 I3 = w.integral();
    CHECK((I3 - (I3.trace() / 3.0) * Mat3::Identity()).norm() < 1e-10 * I3.norm());
  }
  // ||W||_{L2(D)} = O(a^{-(1/2+h)}): three-point slope within +-0.15
  const double slope = std::log(norms[2] / norms[0]) / std::log(as[2] / as[0]);
  CHECK(slope > -(0.5 + h) - 0.15);
  CHECK(slope < -(0.5 + h) + 0.15);

  // translates share alpha exactly (Kelvin kernel is translation invariant)
  auto st = tune_frequency(spec, 0, c, 0.02, h);
  auto w1 = solve_w(scaled_rule(base_rule(), Vec3(0.3, 0.0, -0.1), 0.02), st, kBg);
  auto w2 = solve_w(scaled_rule(base_rule(), Vec3(-0.2, 0.25, 0.0), 0.02), st, kBg);
  CHECK(std::abs(scattering_alpha(w1) - scattering_alpha(w2)) <
        1e-12 * std::abs(scattering_alpha(w1)));

  // error paths
  CHECK_THROWS_AS(solve_w(boundary_quadrature(Domain::Ball, 6), st, kBg),
                  ValidationError);
  auto singular = st;
  singular.c_n0 = -1e-13;
  singular.a = 1.0;
  CHECK_THROWS_AS(solve_w(scaled_rule(base_rule(), Vec3::Zero(), 1.0), singular, kBg),
                  NumericalError);
}

TEST_CASE("W field: off-resonance one-term Neumann oracle") {
  const auto& spec = ball_spectrum();
  // gap O(1): 1 - c a^h = 0.05 puts (omega^2 rho1)^{-1} well above the spectrum;
  // built directly since tune_frequency enforces the resonant sign c < 0
  FrequencySetting st;
  st.n0 = 0;
  st.h = 0.5;
  st.a = 0.05;
  st.c_n0 = 0.95 / std::pow(st.a, st.h);
  st.rho_tilde1 = 1.0;
  st.lambda_n0_B = spec.eigenvalues[0];

  auto rule = scaled_rule(base_rule(), Vec3::Zero(), st.a);
  auto w = solve_w(rule, st, kBg);
  const double w2r1 = st.omega_sq() * st.rho1();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    num += rule.weights[i] * (w.values[i] - w2r1 * Mat3::Identity()).squaredNorm();
    den += rule.weights[i] * (w2r1 * Mat3::Identity()).squaredNorm();
  }
  CHECK(std::sqrt(num / den) < 0.10);
  CHECK(scattering_alpha(w) == doctest::Approx(w2r1 * rule.total_weight()).epsilon(0.10));
}

TEST_CASE("W field: spectral expansion identity") {
  const auto& spec = ball_spectrum();
  auto st = tune_frequency(spec, 0, -1.0, 0.02, 0.5);
  auto rule = scaled_rule(base_rule(), Vec3(0.05, 0.0, -0.1), 0.02);
  auto w = solve_w(rule, st, kBg);
  auto specD = newton_spectrum(rule, kBg, 8);
  const double mu_inv = 1.0 / (st.omega_sq() * st.rho1());

  double scale = 0.0;
  for (int n = 0; n < 8; ++n)
    for (int col = 0; col < 3; ++col)
      scale = std::max(scale, std::abs(specD.moments(col, n) /
                                       (mu_inv - specD.eigenvalues[n])));
  for (int n = 0; n < 8; ++n) {
    for (int col = 0; col < 3; ++col) {
      double proj = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i)
        proj += rule.weights[i] * specD.eigenvectors.col(n).segment<3>(3 * i).dot(
                                      Vec3(w.values[i].col(col)));
      const double pred = specD.moments(col, n) / (mu_inv - specD.eigenvalues[n]);
      CHECK(std::abs(proj - pred) < 1e-8 * scale);
    }
  }
}

TEST_CASE("beta coefficients: free space, placement, collar scaling") {
  const auto& spec = ball_spectrum();
  auto vol = domain_volume_rule(Domain::Ball, 4);
  auto bdry = boundary_quadrature(Domain::Ball, 12);
  auto rho = [](const Vec3&) { return 1.0; };
  const double h = 0.5, c = -1.0;

  // free-space mode: R == 0 -> beta exactly 1
  {
    NeumannGreen free_green(kBg, GreenMode::FreeSpace);
    auto st = tune_frequency(spec, 0, c, 0.002, h);
    auto w = solve_w(scaled_rule(base_rule(), Vec3::Zero(), st.a), st, kBg);
    auto betas = beta_coefficients(manual_cluster(h, st.a, {Vec3(0.1, 0.0, 0.0)}), w,
                                   free_green);
    REQUIRE(betas.size() == 1);
    CHECK(betas[0] == Complex(1.0, 0.0));
  }

  // near-collar inclusion deviates more than a deep-interior one (R grows
  // towards the boundary at sub-resonant omega)
  {
    const double a = 0.002;
    auto st = tune_frequency(spec, 0, c, a, h,
                             rho_tilde_for_omega(spec, c, a, h, 0.9));
    CHECK(st.omega() == doctest::Approx(0.9).epsilon(1e-12));
    NeumannGreen green(vol, bdry, kBg, rho, st.omega());
    const double s = 0.5 * std::pow(a, (1.0 - h) / 3.0);
    auto cg = manual_cluster(h, a, {Vec3(0.0, 0.0, 1.0 - s), Vec3(0.2, 0.1, 0.0)});
    auto w = solve_w(scaled_rule(base_rule(), Vec3::Zero(), a), st, kBg);
    auto betas = beta_coefficients(cg, w, green);
    REQUIRE(betas.size() == 2);
    CHECK(std::abs(betas[0] - 1.0) > 1.2 * std::abs(betas[1] - 1.0));
    for (const auto& b : betas) CHECK(std::abs(b) > 0.5);

    // too-large inclusions push |beta| below the 1/2 guard
    auto st_big = tune_frequency(spec, 0, c, 0.02, h,
                                 rho_tilde_for_omega(spec, c, 0.02, h, 0.9));
    auto w_big = solve_w(scaled_rule(base_rule(), Vec3::Zero(), 0.02), st_big, kBg);
    CHECK_THROWS_AS(
        beta_coefficients(manual_cluster(h, 0.02, {Vec3(0.0, 0.0, 1.0 - s)}), w_big,
                          green),
        NumericalError);

    // reference rule must be origin-centered
    CHECK_THROWS_AS(beta_coefficients(cg, w_big, green), ValidationError);
  }

  // collar scaling: max |beta - 1| ~ a^{2(1-h)/3} within +-0.3 on the exponent
  {
    std::vector<double> as{0.004, 0.002, 0.001}, devs;
    for (double a : as) {
      auto st = tune_frequency(spec, 0, c, a, h,
                               rho_tilde_for_omega(spec, c, a, h, 1.0));
      NeumannGreen green(vol, bdry, kBg, rho, st.omega());
      const double s = 0.5 * std::pow(a, (1.0 - h) / 3.0);
      auto cg = manual_cluster(h, a, {Vec3(0.0, 0.0, 1.0 - s)});
      auto w = solve_w(scaled_rule(base_rule(), Vec3::Zero(), a), st, kBg);
      auto betas = beta_coefficients(cg, w, green);
      devs.push_back(std::abs(betas[0] - 1.0));
      // magnitude law |beta - 1| <= C a^{2(1-h)/3} with desk-scale C
      CHECK(devs.back() < 4.0 * std::pow(a, 2.0 * (1.0 - h) / 3.0));
    }
    const double expo = std::log(devs[2] / devs[0]) / std::log(as[2] / as[0]);
    CHECK(expo > 2.0 * (1.0 - h) / 3.0 - 0.3);
    CHECK(expo < 2.0 * (1.0 - h) / 3.0 + 0.3);
  }
}
