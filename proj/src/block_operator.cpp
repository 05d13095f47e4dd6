#include "ecl/block_operator.hpp"

#include <fstream>

#include <json.hpp>

namespace ecl {

CVecX pack_field(const std::vector<CVec3>& values) {
  CVecX out(3 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    for (int k = 0; k < 3; ++k) out[3 * i + k] = values[i][k];
  return out;
}

std::vector<CVec3> unpack_field(const CVecX& flat) {
  std::vector<CVec3> out(flat.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int k = 0; k < 3; ++k) out[i][k] = flat[3 * i + k];
  return out;
}

std::uint64_t rule_hash(const QuadratureRule& rule) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& x : rule.nodes) mix(x.data(), 3 * sizeof(double));
  for (double w : rule.weights) mix(&w, sizeof(double));
  for (const auto& n : rule.normals) mix(n.data(), 3 * sizeof(double));
  return h;
}

void BlockOperator::export_binary(const std::string& path_base) const {
  {
    std::ofstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw ValidationError("export_binary: cannot open " + path_base + ".bin");
    // row-major stream of 16-byte complex values
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        const Complex v = mat(r, c);
        const double re = v.real(), im = v.imag();
        bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
        bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
      }
  }
  nlohmann::json sidecar;
  sidecar["rows"] = mat.rows();
  sidecar["cols"] = mat.cols();
  sidecar["source_rule_hash"] = rule_hash(source_rule);
  sidecar["target_rule_hash"] = rule_hash(target_rule);
  std::ofstream js(path_base + ".json");
  js << sidecar.dump(2) << "\n";
}

Complex weighted_inner(const QuadratureRule& rule, const CVecX& u, const CVecX& v) {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    for (int k = 0; k < 3; ++k)
      acc += rule.weights[i] * std::conj(u[3 * i + k]) * v[3 * i + k];
  return acc;
}

Complex weighted_bilinear(const QuadratureRule& rule, const CVecX& u, const CVecX& v) {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    for (int k = 0; k < 3; ++k) acc += rule.weights[i] * u[3 * i + k] * v[3 * i + k];
  return acc;
}

double weighted_norm(const QuadratureRule& rule, const CVecX& u) {
  return std::sqrt(std::abs(weighted_inner(rule, u, u)));
}

double weighted_operator_norm(const BlockOperator& op) {
  // similarity transform D_t^{1/2} A D_s^{-1/2} makes the matrix an operator
  // between plain Euclidean spaces with the weighted norms preserved
  CMatX m = op.mat;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double wt = std::sqrt(op.target_rule.weights[r / 3]);
    m.row(r) *= wt;
  }
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double ws = std::sqrt(op.source_rule.weights[c / 3]);
    m.col(c) /= ws;
  }
  Eigen::BDCSVD<CMatX> svd(m);
  return svd.singularValues()(0);
}

}  // namespace ecl
