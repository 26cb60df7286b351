#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fhj/constants.hpp"
#include "fhj/field.hpp"
#include "fhj/problem.hpp"

namespace fhj {

/// The six closed-form barrier variants: one sub/super pair per solution
/// regime (bounded-amplitude family, positive scale profile, negative scale
/// profile).
enum class BarrierCase {
  family_sub,
  family_super,
  scale_pos_sub,
  scale_pos_super,
  scale_neg_sub,
  scale_neg_super,
};

std::string to_string(BarrierCase c);
bool is_sub(BarrierCase c);

/// Feasible corrector-exponent interval for a case at given (s, p).
/// Empty (lo >= hi) signals a case/band mismatch.
std::pair<double, double> gamma_interval(BarrierCase c, double s, double p);

/// A closed-form sub- or supersolution: a combination of distance powers
/// plus an interior indicator shift, vanishing identically outside the
/// domain.
struct BarrierTerm {
  double coef = 0.0;
  double expo = 0.0;
};

struct Barrier {
  BarrierCase label = BarrierCase::family_sub;
  Domain dom = Domain::interval(-1.0, 1.0);
  std::vector<BarrierTerm> terms;  // powers of d; the indicator is expo == 0
  double indicator = 0.0;          // signed coefficient of the interior shift
  double amplitude = 0.0;          // t (family) or the scale amplitude used
  double gamma = 0.0;              // corrector exponent
  double eps = 0.0;                // strictness margin the barrier targets

  FieldPtr field() const;  ///< evaluable closed form (zero outside dom)
  double value(double x) const;
  double deriv(double x) const;
};

/// Default strictness margin: 0.05 * ||f||_inf + 0.01.
double default_strictness(const ProblemSpec& spec);

/// Assemble the closed-form barrier for a case.  The corrector exponent
/// defaults to the midpoint of its feasible interval (biased positive when
/// the band allows a positive choice); coefficients come from the scale
/// constants of the operator, adjusted by the strictness margin; the
/// indicator coefficient is sized by doubling search so the inequality
/// extends from the boundary band to the whole domain.
Barrier build_barrier(BarrierCase label, const ProblemSpec& spec,
                      double t_or_amp,
                      std::optional<double> gamma = std::nullopt,
                      std::optional<double> eps = std::nullopt);

/// First-order boundary expansion of the case's solution, as a term list in
/// the Barrier container: the profile both barriers of the pair are built
/// around, with no strictness padding and no interior shift.  For the
/// bounded-amplitude family this is t d^{s-1} - C1 d^gamma with C1 the exact
/// corrector balancing the gradient power; for the scale cases it is the
/// bare amplitude power (their corrector has no distinguished coefficient).
/// The profile lies strictly between the corresponding sub/super pair built
/// with the same corrector exponent, which is what makes it usable as
/// truncation-level data in the nested-domain construction.
Barrier expansion_profile(const Barrier& like, const ProblemSpec& spec);

/// Pointwise residual r(x) = -I U(x) + |U'(x)|^p + lambda U(x) - f(x) of a
/// barrier, with the operator evaluated by adaptive quadrature.  The
/// quadrature error estimate is added to *quad_err when non-null.
double barrier_residual(const Barrier& b, const ProblemSpec& spec, double x,
                        double* quad_err = nullptr);

struct PointCheck {
  double x = 0.0;
  double d = 0.0;
  double residual = 0.0;
  double quad_err = 0.0;
  double margin = 0.0;  // distance to the strict inequality, >= 0 passes
  bool pass = false;
};

struct VerificationReport {
  bool pass = false;
  double eps = 0.0;
  double worst_margin = 0.0;
  double worst_x = 0.0;
  std::vector<PointCheck> points;  // sorted by x
};

/// Check the strict sub/supersolution inequality at n_check points with
/// boundary distance spread geometrically over the band (both boundary
/// sides of an interval).  Sub passes iff r <= -eps everywhere, super iff
/// r >= +eps; quadrature error counts against the margin.
VerificationReport verify_barrier(const Barrier& b, const ProblemSpec& spec,
                                  std::pair<double, double> band,
                                  int n_check = 24);

/// Largest band edge d_eps such that verify_barrier passes on
/// (d_min, d_eps), found by doubling plus bisection.  Returns 0 when even
/// the smallest band fails.
double barrier_band_edge(const Barrier& b, const ProblemSpec& spec,
                         double d_min = 1e-4, int n_check = 12);

/// Result of probing the one-point expansion I d^tau ~ d^{tau-2s} (c + ...):
/// the measured constant, the fitted remainder order, and the fit quality.
struct ExpansionFit {
  double tau = 0.0;
  double measured_c = 0.0;
  double remainder_order = 0.0;
  double amplitude = 0.0;  // A in  c_hat(d) = c + A d^alpha
  double r_squared = 0.0;
  std::vector<double> d_sequence;
  std::vector<double> c_hat;
};

/// Evaluate I d^tau at points with the given boundary distances, rescale to
/// c_hat(d) = d^{2s-tau} I d^tau, and fit c_hat = c + A d^alpha.  On the
/// half line c_hat is constant (pure scaling) and the remainder order is
/// reported as +inf.
ExpansionFit expansion_probe(const OperatorSpec& op, double tau,
                             const Domain& dom, std::vector<double> d_sequence,
                             double quad_tol = 1e-9);

/// Geometric default probe sequence, n points from d_hi down to d_lo.  The
/// default window sits where the interval's far-boundary correction -- the
/// remainder the fit is after -- still stands clear of quadrature noise.
std::vector<double> probe_sequence(double d_lo = 1e-3, double d_hi = 1e-1,
                                   int n = 12);

}  // namespace fhj
