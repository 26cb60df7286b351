#pragma once

#include <array>
#include <functional>
#include <limits>
#include <utility>

#include "fhj/fracop.hpp"

namespace fhj {

/// A boundary-constant value together with its quadrature error estimate.
struct CValue {
  double value = 0.0;
  double error = 0.0;
};

/// c(tau) for a single kernel: the principal value of
///   int [(1+z)_+^tau - 1] K(z) dz,
/// computed as the operator applied to the half-line profile d^tau at d = 1.
/// Defined for tau in (-1, 2s); diverges to +inf at both endpoints.
CValue c_kernel(const Kernel& k, double tau, double tol = 1e-9);

/// Same constant for the extremal operators (plus = upper, minus = lower).
CValue c_extremal(double s, double lo, double hi, bool plus, double tau,
                  double tol = 1e-9);

/// Same constant for an arbitrary operator spec.
CValue c_operator(const OperatorSpec& op, double tau, double tol = 1e-9);

/// Constant of the reflected operator -I(-.).
CValue c_tilde(const OperatorSpec& op, double tau, double tol = 1e-9);

/// Sampled curve tau -> c(tau) on a uniform grid strictly inside (-1, 2s).
struct CurveSample {
  double s = 0.75;
  std::vector<double> tau_nodes;
  std::vector<double> values;
  std::vector<double> errors;
};

CurveSample sample_curve(const OperatorSpec& op, std::size_t n = 200,
                         double tol = 1e-9, Exec exec = Exec::parallel);

/// Bisection zero of tau -> c(tau) on [lo, hi]; requires a sign change.
double c_zero(const OperatorSpec& op, double lo, double hi, double tol_tau = 1e-8,
              double quad_tol = 1e-10);

/// The two zeros of the curve, bracketed around s-1 and s.
std::pair<double, double> c_zeros(const OperatorSpec& op, double tol_tau = 1e-8);

/// Surface integral  int_{S^{N-1}} |theta_N|^{2s} a(theta) dsigma(theta)
/// for N in {1,2,3}; the argument passes the unit vector padded to three
/// components.  N = 1 uses counting measure on the two-point sphere, so
/// a == 1 gives 2.
double spherical_weight(int N, double s,
                        const std::function<double(const std::array<double, 3>&)>& a,
                        double tol = 1e-10);

/// The case-relevant boundary constants, NaN when not applicable.
struct CaseInputs {
  double c_plus_gamma = std::numeric_limits<double>::quiet_NaN();
  double c_beta = std::numeric_limits<double>::quiet_NaN();
  double c_tilde_beta = std::numeric_limits<double>::quiet_NaN();
};

/// Barrier amplitudes derived from the boundary constants.
struct ScaleConstants {
  double C1_bar = std::numeric_limits<double>::quiet_NaN();  // |t(s-1)|^p / |c+(gamma)|
  double T_bar = std::numeric_limits<double>::quiet_NaN();   // (c(beta)/|beta|^p)^{1/(p-1)}
  double T_star = std::numeric_limits<double>::quiet_NaN();  // (-c~(beta)/|beta|^p)^{1/(p-1)}
  double beta = std::numeric_limits<double>::quiet_NaN();
};

/// Combine the injected constants into amplitudes, enforcing the sign each
/// case requires: c+(gamma) < 0, c(beta) > 0, c~(beta) < 0.
ScaleConstants scale_constants(double s, double p, double t, const CaseInputs& c);

}  // namespace fhj
