#include "ecl/quadrature.hpp"

#include <cmath>
#include <numeric>

namespace ecl {

double QuadratureRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

QuadratureRule inclusion_quadrature(Shape shape, int resolution) {
  if (resolution < 2) throw ValidationError("inclusion_quadrature: resolution must be >= 2");
  QuadratureRule rule;
  if (shape == Shape::Cube) {
    const double hcell = 1.0 / resolution;
    const double w = hcell * hcell * hcell;
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j)
        for (int k = 0; k < resolution; ++k) {
          rule.nodes.emplace_back(-0.5 + (i + 0.5) * hcell, -0.5 + (j + 0.5) * hcell,
                                  -0.5 + (k + 0.5) * hcell);
          rule.weights.push_back(w);
        }
    return rule;
  }
  // Ball of radius 1: cartesian midpoint grid. Cells crossing the sphere are
  // clipped by 6^3 subcell sampling; their node moves to the centroid of the
  // retained subcells so nodes stay inside B.
  const double hcell = 2.0 / resolution;
  const double w = hcell * hcell * hcell;
  const double circum = 0.5 * std::sqrt(3.0) * hcell;
  const int sub = 6;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      for (int k = 0; k < resolution; ++k) {
        Vec3 c(-1.0 + (i + 0.5) * hcell, -1.0 + (j + 0.5) * hcell, -1.0 + (k + 0.5) * hcell);
        const double rad = c.norm();
        if (rad <= 1.0 - circum) {  // fully inside
          rule.nodes.push_back(c);
          rule.weights.push_back(w);
        } else if (rad < 1.0 + circum) {  // crossing: clip by subcells
          int inside = 0;
          Vec3 centroid = Vec3::Zero();
          const double hs = hcell / sub;
          for (int si = 0; si < sub; ++si)
            for (int sj = 0; sj < sub; ++sj)
              for (int sk = 0; sk < sub; ++sk) {
                Vec3 p = c + Vec3(-0.5 * hcell + (si + 0.5) * hs,
                                  -0.5 * hcell + (sj + 0.5) * hs,
                                  -0.5 * hcell + (sk + 0.5) * hs);
                if (p.norm() <= 1.0) {
                  ++inside;
                  centroid += p;
                }
              }
          if (inside > 0) {
            rule.nodes.push_back(centroid / inside);
            rule.weights.push_back(w * inside / (sub * sub * sub));
          }
        }
      }
  return rule;
}

QuadratureRule domain_volume_rule(Domain domain, int resolution) {
  return inclusion_quadrature(domain == Domain::Ball ? Shape::Ball : Shape::Cube, resolution);
}

QuadratureRule scaled_rule(const QuadratureRule& base, const Vec3& center, double a) {
  if (base.is_boundary())
    throw ValidationError("scaled_rule: expected a volume rule");
  QuadratureRule out;
  out.nodes.reserve(base.size());
  out.weights.reserve(base.size());
  const double w_scale = a * a * a;
  for (std::size_t i = 0; i < base.size(); ++i) {
    out.nodes.push_back(center + a * base.nodes[i]);
    out.weights.push_back(w_scale * base.weights[i]);
  }
  return out;
}

QuadratureRule sphere_rule(const Vec3& center, double r, int order) {
  if (order < 2) throw ValidationError("sphere_rule: order must be >= 2");
  if (!(r > 0.0)) throw ValidationError("sphere_rule: radius must be > 0");
  std::vector<double> ct, wt;
  gauss_legendre(order, ct, wt);
  const int n_phi = 2 * order;
  const double dphi = 2.0 * M_PI / n_phi;
  QuadratureRule rule;
  rule.patches.push_back({0, order, n_phi});
  for (int i = 0; i < order; ++i) {
    const double cos_t = ct[i];
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      Vec3 n(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t);
      rule.nodes.push_back(center + r * n);
      rule.normals.push_back(n);
      rule.weights.push_back(r * r * wt[i] * dphi);
    }
  }
  return rule;
}

QuadratureRule boundary_quadrature(Domain domain, int order) {
  if (order < 2) throw ValidationError("boundary_quadrature: order must be >= 2");
  if (domain == Domain::Ball) return sphere_rule(Vec3::Zero(), 1.0, order);

  // cube of side 1: six faces, per-face tensor midpoint rule
  QuadratureRule rule;
  const double hcell = 1.0 / order;
  const double w = hcell * hcell;
  int offset = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      rule.patches.push_back({offset, order, order});
      offset += order * order;
      Vec3 n = Vec3::Zero();
      n[axis] = sign;
      const int u_ax = (axis + 1) % 3, v_ax = (axis + 2) % 3;
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) {
          Vec3 p = Vec3::Zero();
          p[axis] = 0.5 * sign;
          p[u_ax] = -0.5 + (i + 0.5) * hcell;
          p[v_ax] = -0.5 + (j + 0.5) * hcell;
          rule.nodes.push_back(p);
          rule.normals.push_back(n);
          rule.weights.push_back(w);
        }
    }
  }
  return rule;
}

CVec3 spherical_mean(const std::function<CVec3(const Vec3&)>& field, const Vec3& center,
                     double r, int order) {
  QuadratureRule rule = sphere_rule(center, r, order);
  CVec3 sum = CVec3::Zero();
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * field(rule.nodes[i]);
  return sum / (4.0 * M_PI * r * r);
}

}  // namespace ecl
