#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fhj/field.hpp"
#include "fhj/kernel.hpp"

namespace fhj {

/// Result of one principal-value evaluation L u(x).  The three components
/// sum to `value` exactly: the near field carries the local C^2 model, the
/// far field the adaptive panels, the tail everything beyond the cutoff.
struct EvalResult {
  double value = 0.0;
  double near_field = 0.0;
  double far_field = 0.0;
  double tail = 0.0;
  double quad_error = 0.0;  ///< accumulated error estimate (absolute)
  std::size_t evals = 0;
  bool ok = true;           ///< false if the tolerance was unreachable
  std::string note;

  double total() const { return near_field + far_field + tail; }
};

/// L_K u(x) = PV int (u(x+z) - u(x)) K(z) dz for a single symmetric kernel,
/// computed through the symmetrized second difference.
EvalResult eval_linear_pv(const Kernel& k, const Field& u, double x, double tol);

/// Extremal (Pucci-type) operator over kernels bounded between lo and hi
/// multiples of |z|^{-1-2s}: plus = sup (weights the positive part of the
/// second difference by hi), minus = inf.
EvalResult eval_extremal(double s, double lo, double hi, bool plus,
                         const Field& u, double x, double tol);

/// Evaluation of a constant-multiplier kernel on a sum of distance powers by
/// exact superposition.  On the half line the scaling identity
///   L d^tau (x) = c(tau) dist(x)^{tau-2s}
/// holds exactly; on an interval the field deviates from the half-line
/// profile only beyond the midpoint, so the deviation integrals see the
/// evaluation point from a distance and stay tame.  This route keeps the
/// relative error near machine level even close to the boundary, where
/// direct principal-value quadrature of d^{tau-2s}-sized values loses five
/// or six digits; barrier verification and expansion probes depend on that.
/// Returns nullopt when no closed form applies (radial multiplier present,
/// exponent outside (-1,2s), x outside or too near the midpoint kink).
std::optional<EvalResult> eval_power_split(const Kernel& k, const PowerField& u,
                                           double x, double tol);

/// inf-sup over a finite kernel family; reports the attaining indices
/// (ties broken toward the lowest index).
struct InfSupResult {
  EvalResult eval;
  std::size_t outer = 0;
  std::size_t inner = 0;
};
InfSupResult eval_inf_sup(const OperatorSpec& op, const Field& u, double x, double tol);

/// Dispatch on the operator kind.
EvalResult evaluate(const OperatorSpec& op, const Field& u, double x, double tol);

enum class Exec { serial, parallel };

/// Evaluate the operator at every grid node.  The parallel path distributes
/// nodes over OpenMP threads; each node's quadrature is sequential, so both
/// paths produce bit-identical results.
std::vector<EvalResult> apply_on_grid(const OperatorSpec& op, const GridFunction& u,
                                      double tol, Exec exec = Exec::parallel);

}  // namespace fhj
