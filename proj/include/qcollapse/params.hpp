#pragma once

#include <cmath>
#include <sstream>

#include "qcollapse/errors.hpp"

namespace qcollapse {

/// Constants of one collapse problem in the potential U(r) = -beta / r^2.
///
/// The potential strength enters through the dimensionless
/// beta_tilde = 2 m beta / hbar^2, so that the radial similarity equation
///   R'' + (2/xi + i xi) R' + gamma R / xi^2 = 0
/// holds for any choice of hbar and mass with gamma = beta_tilde - l(l+1).
/// The similarity variable is xi = r / sqrt(-chi t) with chi = hbar / mass.
struct CollapseParams {
  double beta_tilde = 0.0;
  int ell = 0;
  double hbar = 1.0;
  double mass = 1.0;
  double chi = 1.0;
  double gamma = 0.0;
  double alpha = 0.0;
  static constexpr double nu = 0.5;

  /// Centrifugal coefficient l(l+1).
  double centrifugal() const { return double(ell) * double(ell + 1); }
};

/// Builds a validated parameter set.  Throws FallConditionViolated when
/// gamma <= 1/4: no collapsing similarity solution exists there.
inline CollapseParams derive_params(double beta_tilde, int ell, double hbar = 1.0,
                                    double mass = 1.0) {
  if (!std::isfinite(beta_tilde)) throw InvalidInput("beta_tilde must be finite");
  if (ell < 0) throw InvalidInput("ell must be a non-negative integer");
  if (!std::isfinite(hbar) || hbar <= 0.0) throw InvalidInput("hbar must be finite and > 0");
  if (!std::isfinite(mass) || mass <= 0.0) throw InvalidInput("mass must be finite and > 0");

  CollapseParams p;
  p.beta_tilde = beta_tilde;
  p.ell = ell;
  p.hbar = hbar;
  p.mass = mass;
  p.chi = hbar / mass;
  p.gamma = beta_tilde - p.centrifugal();
  if (!(p.gamma > 0.25)) {
    std::ostringstream msg;
    msg << "fall condition violated: gamma = beta_tilde - l(l+1) = " << p.gamma
        << " but collapse requires gamma > 1/4";
    throw FallConditionViolated(msg.str());
  }
  p.alpha = std::sqrt(4.0 * p.gamma - 1.0);
  return p;
}

/// Convenience for the common case of specifying gamma directly (l = 0).
inline CollapseParams params_from_gamma(double gamma, double hbar = 1.0, double mass = 1.0) {
  return derive_params(gamma, 0, hbar, mass);
}

/// Classical fall criterion: lim r^2 U(r) < -M^2 / (2m), strictly.
inline bool classical_fall_allowed(double limit_coeff, double angular_momentum, double mass) {
  if (!std::isfinite(limit_coeff) || !std::isfinite(angular_momentum) || !std::isfinite(mass))
    throw InvalidInput("classical_fall_allowed: inputs must be finite");
  if (mass <= 0.0) throw InvalidInput("classical_fall_allowed: mass must be > 0");
  return limit_coeff < -angular_momentum * angular_momentum / (2.0 * mass);
}

}  // namespace qcollapse
