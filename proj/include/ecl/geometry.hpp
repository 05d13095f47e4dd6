#pragma once

#include <string>
#include <vector>

#include "ecl/kernels.hpp"

namespace ecl {

// Domain Ω: unit ball (radius 1) or unit-volume cube (side 1), both centered
// at the origin. The reference inclusion shape B uses the same descriptors.
enum class Domain { Ball, Cube };
enum class Shape { Ball, Cube };

std::string to_string(Domain d);
std::string to_string(Shape s);
Domain domain_from_string(const std::string& s);
Shape shape_from_string(const std::string& s);

class EmptyClusterError : public ValidationError {
public:
  explicit EmptyClusterError(const std::string& what) : ValidationError(what) {}
};

// Assumption-1 periodic cluster: cubic cells of volume a^{1-h} tiling Ω, one
// inclusion D_j = z_j + aB per retained cell; cells intersecting the κ-collar
// of ∂Ω are dropped.
struct ClusterGeometry {
  Domain domain = Domain::Cube;
  double h = 0.5;
  double a = 0.01;
  std::vector<Vec3> centers;
  double cell_volume = 0.0;  // a^{1-h}
  double d = 0.0;            // minimal center spacing = cell edge
  double kappa = 0.0;        // boundary clearance
  Shape shape_B = Shape::Ball;

  std::size_t M() const { return centers.size(); }

  std::string to_json() const;
  static ClusterGeometry from_json(const std::string& text);
};

ClusterGeometry build_cluster(Domain domain, double h, double a,
                              Shape shape_B = Shape::Ball);

// Half-extent of the domain bounding box (ball: 1, cube: 1/2) and volume.
double domain_half_extent(Domain d);
double domain_volume(Domain d);

// Distance from an interior point to ∂Ω (positive inside).
double distance_to_boundary(Domain d, const Vec3& x);

}  // namespace ecl
