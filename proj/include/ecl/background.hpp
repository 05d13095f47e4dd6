#pragma once

#include <cmath>
#include <complex>

#include "ecl/errors.hpp"

namespace ecl {

using Complex = std::complex<double>;

// Homogeneous isotropic elastic background: Lamé moduli and mass density,
// with the derived wave speeds and the Kelvin constants gamma1/gamma2.
struct ElasticBackground {
  double lambda = 1.0;  // first Lamé modulus
  double mu = 1.0;      // shear modulus, > 0
  double rho0 = 1.0;    // background density, > 0

  ElasticBackground() = default;
  ElasticBackground(double lambda_, double mu_, double rho0_)
      : lambda(lambda_), mu(mu_), rho0(rho0_) {
    validate();
  }

  void validate() const {
    if (!(mu > 0.0)) throw ValidationError("ElasticBackground: mu must be > 0");
    if (!(3.0 * lambda + 2.0 * mu > 0.0))
      throw ValidationError("ElasticBackground: 3*lambda + 2*mu must be > 0 (strong convexity)");
    if (!(rho0 > 0.0)) throw ValidationError("ElasticBackground: rho0 must be > 0");
    if (!(lambda + 2.0 * mu > 0.0))
      throw ValidationError("ElasticBackground: lambda + 2*mu must be > 0");
  }

  double cp() const { return std::sqrt((lambda + 2.0 * mu) / rho0); }
  double cs() const { return std::sqrt(mu / rho0); }
  double kp(double omega) const { return omega / cp(); }
  double ks(double omega) const { return omega / cs(); }

  // Kelvin constants: gamma1 > gamma2 > 0 for finite lambda.
  double gamma1() const { return 0.5 * (1.0 / mu + 1.0 / (2.0 * mu + lambda)); }
  double gamma2() const { return 0.5 * (1.0 / mu - 1.0 / (2.0 * mu + lambda)); }
};

}  // namespace ecl
