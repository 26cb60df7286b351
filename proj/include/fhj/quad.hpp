#pragma once

#include <cstddef>
#include <functional>

namespace fhj {

/// Outcome of a numerical integration: value, error estimate, work done.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;   ///< estimated absolute error
  std::size_t evals = 0;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evals += o.evals;
    return *this;
  }
};

using Fn1 = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integration of f over the finite interval [a,b].
/// The integrand must be bounded; `tol` is an absolute error target
/// (best effort -- check the returned error estimate).
QuadResult integrate(const Fn1& f, double a, double b, double tol);

/// Integrate f over [a,b] where f(x) ~ |x - c|^expo * (smooth) at the
/// endpoint c (c == a or c == b), with expo in (-1,1).  The power is removed
/// by the substitution w = |x - c|^(1+expo) before integrating adaptively.
QuadResult integrate_power_endpoint(const Fn1& f, double a, double b, double c,
                                    double expo, double tol);

/// int_a^b |x - c|^expo g(x) dx with g smooth up to the endpoint c and
/// expo > -1.  Preferred over integrate_power_endpoint when the smooth
/// factor is available separately: the same substitution then leaves the
/// transformed integrand g(x(w))/(1+expo) with no power at all, so the
/// singular endpoint never has to be evaluated.
QuadResult integrate_power_weight(const Fn1& g, double a, double b, double c,
                                  double expo, double tol);

/// Integrate f over [a, +inf) via the map z = a + t/(1-t).  The integrand
/// must decay fast enough to be integrable (algebraic decay is fine).
QuadResult integrate_to_infinity(const Fn1& f, double a, double tol);

}  // namespace fhj
