#pragma once

#include <functional>
#include <vector>

#include "fhj/quad.hpp"

namespace fhj {

/// Symmetric jump kernel K(z) = m(|z|) |z|^{-(1+2s)} on the line, with
/// ellipticity bounds lo <= m <= hi.  A constant multiplier (m absent)
/// enables closed-form masses; a radial callable covers the general class.
struct Kernel {
  double s = 0.75;
  double scale = 1.0;  ///< constant multiplier when `mult` is empty
  double lo = 1.0;     ///< lower ellipticity bound of the multiplier
  double hi = 1.0;     ///< upper ellipticity bound of the multiplier
  std::function<double(double)> mult;  ///< optional radial multiplier m(r)

  static Kernel unit(double s) { return Kernel{s, 1.0, 1.0, 1.0, nullptr}; }
  static Kernel scaled(double s, double c) { return Kernel{s, c, c, c, nullptr}; }

  bool constant() const { return !mult; }
  double multiplier(double r) const { return mult ? mult(r) : scale; }
  /// K at radius r > 0
  double density(double r) const;

  /// one-sided tail mass  int_R^inf K(z) dz
  QuadResult tail_mass(double R, double tol = 1e-12) const;
  /// truncated second moment  int_0^r z^2 K(z) dz
  QuadResult second_moment(double r, double tol = 1e-12) const;
  /// int over [r1, r2] of K and of z*K (used for hat-function weights)
  void segment_masses(double r1, double r2, double& m0, double& m1) const;
};

/// Multiplier that turns |z|^{-(1+2s)} into the generator of -(-Delta)^s,
/// i.e. L u(x) = PV int (u(x+z)-u(x)) C |z|^{-1-2s} dz matches the Fourier
/// symbol -|xi|^{2s}.
double physical_normalization(double s);

/// Verify K(rho z) rho^{1+2s} == K(z) on sample points (scale invariance).
bool is_homogeneous(const Kernel& k, double rtol = 1e-10);

/// Nonlocal operator: a single linear kernel, a Pucci extremal pair, or a
/// finite inf-sup family L_ij.  `outer_sup` distinguishes inf_i sup_j (false)
/// from the reflected sup_i inf_j (true).
struct OperatorSpec {
  enum class Kind { linear, pucci_plus, pucci_minus, inf_sup };

  Kind kind = Kind::linear;
  double s = 0.75;
  double lo = 1.0, hi = 1.0;                 ///< extremal bounds for pucci kinds
  std::vector<std::vector<Kernel>> family;   ///< inf-sup members, rows = outer index
  bool outer_sup = false;

  static OperatorSpec linear(Kernel k);
  static OperatorSpec pucci_plus(double s, double lo, double hi);
  static OperatorSpec pucci_minus(double s, double lo, double hi);
  static OperatorSpec inf_sup(double s, std::vector<std::vector<Kernel>> fam);

  /// The reflected operator  I~ u = -I(-u): same for linear kernels, swaps
  /// the Pucci pair, and swaps inf/sup order for families.
  OperatorSpec reflected() const;

  /// Uniform ellipticity bounds over every member kernel.
  double ellipticity_lo() const;
  double ellipticity_hi() const;
};

}  // namespace fhj
