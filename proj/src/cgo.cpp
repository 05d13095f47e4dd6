#include "ecl/cgo.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "ecl/errors.hpp"

namespace ecl {

namespace {

constexpr Complex kI(0.0, 1.0);

// unconjugated complex dot products (all CGO identities are bilinear)
Complex bdot(const CVec3& a, const CVec3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

Complex zdotx(const CVec3& zeta, const Vec3& x) {
  return zeta(0) * x(0) + zeta(1) * x(1) + zeta(2) * x(2);
}

Mat3 complete_basis(const Vec3& xi) {
  Mat3 b;
  b.col(0) = xi.normalized();
  int least = 0;
  double best = std::abs(b.col(0)[0]);
  for (int a = 1; a < 3; ++a)
    if (std::abs(b.col(0)[a]) < best) {
      best = std::abs(b.col(0)[a]);
      least = a;
    }
  b.col(1) = b.col(0).cross(Vec3::Unit(least)).normalized();
  b.col(2) = b.col(0).cross(Vec3(b.col(1)));
  return b;
}

}  // namespace

CgoPair make_cgo_pair(const Vec3& xi, double p2, const ElasticBackground& bg,
                      CgoVariant variant, double iota, double omega) {
  if (xi.norm() == 0.0) throw ValidationError("make_cgo_pair: xi must be nonzero");
  if (!(p2 > 0.0)) throw ValidationError("make_cgo_pair: p2 must be > 0");

  CgoPair pair;
  pair.xi = xi;
  pair.basis = complete_basis(xi);
  pair.variant = variant;
  pair.p2 = p2;
  pair.mu = bg.mu;
  const CVec3 e1 = pair.basis.col(0).cast<Complex>();
  const CVec3 e2 = pair.basis.col(1).cast<Complex>();
  const CVec3 e3 = pair.basis.col(2).cast<Complex>();
  const double len = xi.norm();

  if (variant == CgoVariant::Remark) {
    const double root = std::sqrt(p2 / bg.mu + 0.25 * len * len);
    const double amp = std::sqrt(1.0 + 4.0 * p2 / (bg.mu * len * len));
    pair.zeta1 = -0.5 * len * e1 + kI * root * e2;
    pair.zeta2 = -0.5 * len * e1 - kI * root * e2;
    pair.eta1 = kI * amp * e1 + e2;
    pair.eta2 = kI * amp * e1 - e2;
  } else {
    if (!(iota > 0.0)) throw ValidationError("make_cgo_pair: iota must be > 0");
    const double ks = omega * std::sqrt(bg.rho0 / bg.mu);
    pair.iota = iota;
    pair.t = std::sqrt(std::pow(std::sqrt(p2), 4.0 + 2.0 * iota) + ks * ks);
    const double root = std::sqrt(pair.t * pair.t - ks * ks + 0.25 * len * len);
    pair.zeta1 = -0.5 * len * e1 + kI * root * e2 + pair.t * e3;
    pair.zeta2 = -0.5 * len * e1 - kI * root * e2 - pair.t * e3;
    pair.eta1 = e1 + (0.5 * len / pair.t) * e2;
    pair.eta2 = e1 - (0.5 * len / pair.t) * e2;
  }
  return pair;
}

CVec3 cgo_field(const CgoPair& pair, int which, const Vec3& x) {
  if (pair.variant != CgoVariant::Remark)
    throw ValidationError("cgo_field: theorem-variant fields (F corrections) unsupported");
  if (which != 1 && which != 2) throw ValidationError("cgo_field: which must be 1 or 2");
  const CVec3& zeta = which == 1 ? pair.zeta1 : pair.zeta2;
  const CVec3& eta = which == 1 ? pair.eta1 : pair.eta2;
  return eta * std::exp(kI * zdotx(zeta, x));
}

double cgo_divisor(const CgoPair& pair) {
  const double len2 = pair.xi.squaredNorm();
  return -2.0 - 4.0 * pair.p2 / (pair.mu * len2);
}

CVec3 cgo_traction(const CgoPair& pair, int which, const Vec3& x, const Vec3& nu) {
  if (pair.variant != CgoVariant::Remark)
    throw ValidationError("cgo_traction: remark variant only");
  if (which != 1 && which != 2) throw ValidationError("cgo_traction: which must be 1 or 2");
  const CVec3& zeta = which == 1 ? pair.zeta1 : pair.zeta2;
  const CVec3& eta = which == 1 ? pair.eta1 : pair.eta2;
  const Complex phase = std::exp(kI * zdotx(zeta, x));
  return kI * pair.mu * phase *
         (zdotx(zeta, nu) * eta + zdotx(eta, nu) * zeta);
}

double cgo_remainder_scale(const CgoPair& pair) {
  if (pair.variant != CgoVariant::Theorem)
    throw ValidationError("cgo_remainder_scale: theorem variant only");
  return pair.p2 / pair.t;
}

Complex fourier_datum_volume_oracle(const CgoPair& pair, const DensitySampler& rho,
                                    const QuadratureRule& rule_vol) {
  if (!rho) throw ValidationError("fourier_datum_volume_oracle: missing sampler");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < rule_vol.size(); ++i) {
    const Vec3& y = rule_vol.nodes[i];
    acc += rule_vol.weights[i] * rho(y) *
           bdot(cgo_field(pair, 1, y), cgo_field(pair, 2, y));
  }
  return acc;
}

Complex fourier_datum_boundary(const CgoPair& pair, const CVecX& wqf_trace,
                               const QuadratureRule& rule_bdry) {
  if (!rule_bdry.is_boundary())
    throw ValidationError("fourier_datum_boundary: not a boundary rule");
  if (wqf_trace.size() != static_cast<Eigen::Index>(3 * rule_bdry.size()))
    throw ValidationError("fourier_datum_boundary: trace size does not match rule");
  Complex acc = 0.0;
  for (std::size_t b = 0; b < rule_bdry.size(); ++b) {
    const CVec3 tr = cgo_traction(pair, 2, rule_bdry.nodes[b], rule_bdry.normals[b]);
    acc += rule_bdry.weights[b] * bdot(wqf_trace.segment<3>(3 * b), tr);
  }
  return acc / cgo_divisor(pair);
}

FourierReconstruction reconstruct_density(const FourierData& data, int lattice_cut,
                                          const QuadratureRule& rule_vol) {
  if (lattice_cut < 1) throw ValidationError("reconstruct_density: lattice_cut must be >= 1");
  std::ostringstream missing;
  FourierReconstruction rec;
  rec.lattice_cut = lattice_cut;
  for (int i = -lattice_cut; i <= lattice_cut; ++i)
    for (int j = -lattice_cut; j <= lattice_cut; ++j)
      for (int k = -lattice_cut; k <= lattice_cut; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;  // declared-unknown offset
        const LatticeIndex n{i, j, k};
        auto it = data.find(n);
        if (it == data.end()) {
          missing << " (" << i << "," << j << "," << k << ")";
          continue;
        }
        rec.coeffs[n] = it->second;
        if (std::max({std::abs(i), std::abs(j), std::abs(k)}) == lattice_cut)
          rec.truncation_error_estimate += std::norm(it->second);
      }
  const std::string gaps = missing.str();
  if (!gaps.empty())
    throw ValidationError("reconstruct_density: missing lattice entries:" + gaps);
  rec.truncation_error_estimate = std::sqrt(rec.truncation_error_estimate);

  rec.synthesized.rule = rule_vol;
  rec.synthesized.values.assign(rule_vol.size(), CVec3::Zero());
  for (std::size_t v = 0; v < rule_vol.size(); ++v) {
    Complex acc = 0.0;
    for (const auto& [n, c] : rec.coeffs) {
      const double phase = 2.0 * M_PI *
                           (n[0] * rule_vol.nodes[v][0] + n[1] * rule_vol.nodes[v][1] +
                            n[2] * rule_vol.nodes[v][2]);
      acc += c * std::exp(kI * phase);
    }
    rec.synthesized.values[v] = CVec3(acc, 0.0, 0.0);  // scalar density in slot 0
  }
  return rec;
}

double reconstruction_error(const FourierReconstruction& rec, const DensitySampler& truth) {
  if (!truth) throw ValidationError("reconstruction_error: missing truth sampler");
  const auto& rule = rec.synthesized.rule;
  double mean = 0.0;
  for (std::size_t v = 0; v < rule.size(); ++v)
    mean += rule.weights[v] * truth(rule.nodes[v]);
  mean /= rule.total_weight();
  double num = 0.0, den = 0.0;
  for (std::size_t v = 0; v < rule.size(); ++v) {
    const double ref = truth(rule.nodes[v]) - mean;
    num += rule.weights[v] * std::norm(rec.synthesized.values[v][0] - ref);
    den += rule.weights[v] * ref * ref;
  }
  if (den == 0.0) throw ValidationError("reconstruction_error: constant truth density");
  return std::sqrt(num / den);
}

std::string fourier_data_csv(const FourierData& data) {
  std::ostringstream os;
  os << "xi1,xi2,xi3,re,im\n";
  os.precision(17);
  for (const auto& [n, c] : data)
    os << n[0] << "," << n[1] << "," << n[2] << "," << c.real() << "," << c.imag() << "\n";
  return os.str();
}

}  // namespace ecl
