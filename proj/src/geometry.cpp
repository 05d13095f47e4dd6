#include "ecl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace ecl {

std::string to_string(Domain d) { return d == Domain::Ball ? "ball" : "cube"; }
std::string to_string(Shape s) { return s == Shape::Ball ? "ball" : "cube"; }

Domain domain_from_string(const std::string& s) {
  if (s == "ball") return Domain::Ball;
  if (s == "cube") return Domain::Cube;
  throw ValidationError("unknown domain descriptor: " + s);
}

Shape shape_from_string(const std::string& s) {
  if (s == "ball") return Shape::Ball;
  if (s == "cube") return Shape::Cube;
  throw ValidationError("unknown shape descriptor: " + s);
}

double domain_half_extent(Domain d) { return d == Domain::Ball ? 1.0 : 0.5; }

double domain_volume(Domain d) {
  return d == Domain::Ball ? 4.0 * M_PI / 3.0 : 1.0;
}

double distance_to_boundary(Domain d, const Vec3& x) {
  if (d == Domain::Ball) return 1.0 - x.norm();
  double m = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
  return 0.5 - m;
}

namespace {

// Whole cell (cube of edge L centered at c) inside Ω with clearance kappa.
bool cell_clear(Domain d, const Vec3& c, double L, double kappa) {
  const double tol = 1e-12;
  if (d == Domain::Cube) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(c[i]) + 0.5 * L > 0.5 - kappa + tol) return false;
    return true;
  }
  // ball: conservative circumscribed-radius test
  return c.norm() + 0.5 * std::sqrt(3.0) * L <= 1.0 - kappa + tol;
}

}  // namespace

ClusterGeometry build_cluster(Domain domain, double h, double a, Shape shape_B) {
  if (!(h > 1.0 / 3.0 && h < 1.0))
    throw ValidationError("build_cluster: h must satisfy 1/3 < h < 1");
  if (!(a > 0.0)) throw ValidationError("build_cluster: a must be > 0");

  const double L = std::pow(a, (1.0 - h) / 3.0);  // cell edge, cell volume a^{1-h}
  const double E = domain_half_extent(domain);
  const double kappa = 0.5 * L;  // collar width ≍ a^{(1-h)/3}

  ClusterGeometry cg;
  cg.domain = domain;
  cg.h = h;
  cg.a = a;
  cg.cell_volume = L * L * L;
  cg.d = L;
  cg.kappa = kappa;
  cg.shape_B = shape_B;

  const int n_ax = std::max(1, static_cast<int>(std::floor(2.0 * E / L + 1e-9)));
  const double origin = -0.5 * (n_ax - 1) * L;  // centered, symmetric tiling
  for (int i = 0; i < n_ax; ++i) {
    for (int j = 0; j < n_ax; ++j) {
      for (int k = 0; k < n_ax; ++k) {
        Vec3 c(origin + i * L, origin + j * L, origin + k * L);
        if (cell_clear(domain, c, L, kappa)) cg.centers.push_back(c);
      }
    }
  }
  if (cg.centers.empty())
    throw EmptyClusterError("build_cluster: no cell clears the boundary collar (a too large)");
  return cg;
}

std::string ClusterGeometry::to_json() const {
  nlohmann::json j;
  j["domain"] = to_string(domain);
  j["h"] = h;
  j["a"] = a;
  j["shape_B"] = to_string(shape_B);
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& z : centers) cs.push_back({z[0], z[1], z[2]});
  j["centers"] = cs;
  return j.dump(2);
}

ClusterGeometry ClusterGeometry::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ClusterGeometry cg;
  cg.domain = domain_from_string(j.at("domain").get<std::string>());
  cg.h = j.at("h").get<double>();
  cg.a = j.at("a").get<double>();
  cg.shape_B = shape_from_string(j.at("shape_B").get<std::string>());
  for (const auto& c : j.at("centers"))
    cg.centers.emplace_back(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  const double L = std::pow(cg.a, (1.0 - cg.h) / 3.0);
  cg.cell_volume = L * L * L;
  cg.d = L;
  cg.kappa = 0.5 * L;
  return cg;
}

}  // namespace ecl
