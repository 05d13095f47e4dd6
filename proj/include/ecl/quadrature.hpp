#pragma once

#include <functional>
#include <vector>

#include "ecl/geometry.hpp"

namespace ecl {

// Structured patch of a boundary rule: nodes [offset, offset+rows*cols) are
// laid out row-major on a (rows x cols) surface grid. Used for tangential
// finite differences in the H^{1/2} surrogate norm.
struct SurfacePatch {
  int offset = 0;
  int rows = 0;
  int cols = 0;
};

struct QuadratureRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<Vec3> normals;        // boundary rules only
  std::vector<SurfacePatch> patches;  // boundary rules only

  std::size_t size() const { return nodes.size(); }
  bool is_boundary() const { return !normals.empty(); }
  double total_weight() const;
};

// Midpoint-type volume rule on the reference inclusion B (ball radius 1 or
// cube side 1): resolution^3-order node count.
QuadratureRule inclusion_quadrature(Shape shape, int resolution);

// Midpoint-type volume rule on Ω.
QuadratureRule domain_volume_rule(Domain domain, int resolution);

// Translate/scale a volume rule onto D = center + a*B (weights scale by a^3).
QuadratureRule scaled_rule(const QuadratureRule& base, const Vec3& center, double a);

// Boundary rule on ∂Ω: sphere = Gauss-Legendre(cosθ) x uniform azimuth with
// outward normals; cube = per-face tensor midpoint rules.
QuadratureRule boundary_quadrature(Domain domain, int order);

// Sphere rule of radius r about `center` (normals point outward).
QuadratureRule sphere_rule(const Vec3& center, double r, int order);

// (1/|∂B_r|) ∫_{∂B_r(center)} field dσ.
CVec3 spherical_mean(const std::function<CVec3(const Vec3&)>& field, const Vec3& center,
                     double r, int order);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace ecl
