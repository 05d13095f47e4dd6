#pragma once

#include <string>

#include "ecl/quadrature.hpp"

namespace ecl {

using CMatX = Eigen::MatrixXcd;
using CVecX = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Dense discretized integral operator between quadrature spaces. `mat` maps
// node values to node values, i.e. source quadrature weights are already
// folded in (Nyström convention):
//   (A φ)(x_i) = Σ_j w_j Kernel(x_i, y_j) φ(y_j).
struct BlockOperator {
  QuadratureRule source_rule;
  QuadratureRule target_rule;
  CMatX mat;  // (3 |target|) x (3 |source|)

  CVecX apply(const CVecX& values) const { return mat * values; }

  // Flat binary export (row-major, little-endian, 16-byte complex) plus a
  // JSON sidecar {rows, cols, source_rule_hash, target_rule_hash}.
  void export_binary(const std::string& path_base) const;
};

// Pack/unpack 3-vector fields as flat value vectors [n0x n0y n0z n1x ...].
CVecX pack_field(const std::vector<CVec3>& values);
std::vector<CVec3> unpack_field(const CVecX& flat);

// FNV-1a content hash of a rule's nodes/weights/normals.
std::uint64_t rule_hash(const QuadratureRule& rule);

// Discrete weighted L2 norm / inner product on a rule:
//   <u, v> = Σ_i w_i conj(u_i)·v_i
Complex weighted_inner(const QuadratureRule& rule, const CVecX& u, const CVecX& v);
double weighted_norm(const QuadratureRule& rule, const CVecX& u);

// Bilinear (unconjugated) pairing Σ_i w_i u_i·v_i, used by the N-D pairings.
Complex weighted_bilinear(const QuadratureRule& rule, const CVecX& u, const CVecX& v);

// Operator norm of `mat` viewed as an operator on the weighted L2 spaces
// (via the sqrt-weight similarity transform and a dense SVD).
double weighted_operator_norm(const BlockOperator& op);

}  // namespace ecl
