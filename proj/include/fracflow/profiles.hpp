#pragma once
// Smooth profiles shared by the velocity fields: the time bump with its
// running integral, and the radial 2D mollifier reduced to its 1D marginal.

#include "fracflow/numerics.hpp"

namespace fracflow {

// eta_tilde(t) = b(t)/Z with b(t) = exp(-1/(t(1-t))); mass 1 on (0,1).
// eta = delta * eta_tilde has mass delta and sup delta*b(1/2)/Z.
class TimeProfile {
 public:
  static const TimeProfile& get();

  double rate(double t) const { return time_bump(t) / z_; }
  // running integral of rate from 0 to t, clamped to [0,1]
  double cumulative(double t) const;
  double mass_constant() const { return z_; }
  // sup of rate, attained at t = 1/2
  double sup() const { return std::exp(-4.0) / z_; }

 private:
  TimeProfile();
  double z_;
  HermiteTable cum_;
};

// rho(y) = c exp(-1/(1-|y|^2)) on the unit disk. Its 1D marginal m and the
// smoothed sign S(s) = (rho_1 * sign)(s) = 2 int_0^s m drive J_delta Psi.
class Mollifier2D {
 public:
  static const Mollifier2D& get();

  double norm_constant() const { return c_; }
  double density(double r) const;
  // direct quadrature, used to build the tables and by tests
  double marginal_direct(double s) const;
  double marginal_prime_direct(double s) const;

  double marginal(double s) const;
  // S(s) for unit radius; odd, equal to sign(s) for |s| >= 1
  double sign_profile(double s) const;
  double sign_profile_prime(double s) const { return 2 * marginal(s); }

 private:
  Mollifier2D();
  double c_;
  HermiteTable m_, S_;
};

// S_delta(x) = S(x/delta) and its derivative
inline double smoothed_sign(double x1, double delta) {
  return Mollifier2D::get().sign_profile(x1 / delta);
}
inline double smoothed_sign_prime(double x1, double delta) {
  return Mollifier2D::get().sign_profile_prime(x1 / delta) / delta;
}

// 1D bump exp(-1/(1-z^2)) normalised to unit mass on (-1,1)
class Bump1D {
 public:
  static const Bump1D& get();
  double operator()(double z) const;
  double prime(double z) const;
  double mass_constant() const { return z_; }

 private:
  Bump1D();
  double z_;
};

}  // namespace fracflow
