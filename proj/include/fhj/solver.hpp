#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "fhj/barrier.hpp"
#include "fhj/field.hpp"
#include "fhj/problem.hpp"
#include "fhj/scheme.hpp"

namespace fhj {

/// Outcome of one discrete solve: the iterate as an evaluable grid function,
/// convergence bookkeeping, and -- for bracketed runs -- the pair of fields
/// every accepted iterate stayed between.
struct SchemeState {
  explicit SchemeState(GridFunction g) : grid(std::move(g)) {}

  GridFunction grid;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  /// sup-norm residual trace, thinned to every `history_stride`-th iteration
  /// (the final iterate is always recorded)
  std::vector<double> residual_history;
  std::size_t history_stride = 1;

  /// bracketing pair when set; every accepted iterate satisfied
  /// lower <= u <= upper at all nodes, up to bracket_slack
  FieldPtr lower, upper;
  /// worst assertion margin used: a 10*tol base plus, where the brackets
  /// carry a residual defect, the largest nodewise widening obtained by
  /// inverting the frozen-policy matrix on that defect
  double bracket_slack = 0.0;
  /// worst positive part of the discrete residual at the lower bracket and
  /// worst negative part at the upper one (how far the brackets are from
  /// being exact discrete sub/supersolutions; the widenings derive from these)
  double sub_defect = 0.0, super_defect = 0.0;

  /// nested-domain runs only
  std::vector<std::size_t> levels;  ///< truncation indices n actually run
  std::vector<std::size_t> k_used;  ///< collar depth chosen at each level
  std::vector<double> cauchy;       ///< level-to-level sup change on the compact
};

/// Truncation schedule for the nested-domain construction: working domains
/// are the shells {d > 1/n}, n strictly increasing.
struct PerronSchedule {
  std::vector<std::size_t> n_levels;
  /// pinned collar depths; empty = choose adaptively (smallest k whose
  /// collar perturbation integral drops below min(1/(2n), eps/2))
  std::vector<std::size_t> k_of_n;
  /// compact {d >= margin} on which the level-to-level Cauchy change is taken
  double compact_margin = 0.2;
  /// optional per-level sink (checkpoint writer): called after each level
  /// with (level index, n, solution, scheme residual at the nodes)
  std::function<void(std::size_t, std::size_t, const GridFunction&,
                     const std::vector<double>&)>
      on_level;

  static PerronSchedule doubling(std::size_t n0, std::size_t levels);
};

/// Damped fixed-point solve of the bounded Dirichlet problem on spec.domain:
/// u <- u - dt * R(u) with R(u) = -L_h u + g(D-u, D+u) + lambda u - f, g the
/// Godunov flux, and per-node dt from the row-sum stability bound, iterated
/// until ||R||_inf <= tol.  `dirichlet` is the exterior data field (null =
/// spec.exterior); it must stay bounded on the complement.  Non-convergence
/// within max_iter is reported through the returned state (converged flag
/// plus residual history), not thrown.
SchemeState solve_bounded(const ProblemSpec& spec, const FieldPtr& dirichlet,
                          const GridSpec& grid, double tol,
                          std::size_t max_iter = 200000);

/// Policy-iteration solve of the same discrete equation.  The Godunov flux
/// is the upper envelope of the affine laws c*q - (p-1) p^{-p'} |c|^{p'}
/// over one-sided slopes, so freezing the maximizing c at the current
/// iterate and solving the resulting linear system (strictly diagonally
/// dominant M-matrix for lambda above -lambda0) is the classical policy
/// update; it reaches the same fixed point as solve_bounded in a handful of
/// factorizations, which is what makes fine grids affordable.
SchemeState solve_policy(const ProblemSpec& spec, const FieldPtr& dirichlet,
                         const GridSpec& grid, double tol,
                         std::size_t max_policy = 60);

/// Nested-domain construction of the blow-up solution bracketed by a
/// verified sub/supersolution pair.  For each n the bounded problem is
/// solved on the shell {d > 1/n} with exterior data equal to the truncated
/// expansion profile of the case (which lies strictly between the barriers;
/// seeding with the subsolution itself would drag its interior shift into
/// the data and the recovered boundary amplitude would converge like
/// shell^{1-s}): profile values on the shell complement inside the domain,
/// capped in the collar {d < 1/(n+k+1)} by the linear-in-d interpolant
/// between the boundary data and the profile, and the original exterior
/// data outside the domain.  Brackets against the sub/super pair are
/// asserted at every level (violation throws with the offending node); the
/// returned state carries the finest-level solution, the chosen collar
/// depths, and the level-to-level Cauchy estimate on the compact.
SchemeState perron_solve(const ProblemSpec& spec, const Barrier& sub,
                         const Barrier& super, const PerronSchedule& schedule,
                         double tol);

/// Extremal envelopes of the exterior data seen from inside: evaluates both
/// Pucci-type operators on the data extended by zero across the domain at
/// every grid node.  Subtracting these from the source bounds the original
/// problem between two homogeneous-data problems.
struct ExteriorReduction {
  std::vector<double> x;
  std::vector<double> lower, upper;          ///< M^- and M^+ of the extension
  std::vector<double> err_lower, err_upper;  ///< quadrature error estimates
  std::vector<bool> ok;  ///< per-node flag: both quadratures met tolerance
};
ExteriorReduction reduce_exterior_data(const ExteriorData& phi,
                                       const OperatorSpec& op, const Domain& dom,
                                       const GridSpec& grid, double tol = 1e-8);

/// How to evaluate the pointwise residual of a grid function.
enum class ResidualMode {
  scheme,      ///< the discrete operator the solver itself used
  quadrature,  ///< adaptive principal-value quadrature on the interpolant
};

struct ResidualReport {
  std::vector<double> x, r;
  std::vector<bool> ok;
  double max_norm = 0.0;
};

/// Pointwise residual -I u + |Du|^p + lambda u - f at the nodes of u lying
/// in the x-range `region`.  Scheme mode reproduces the solver's own
/// residual (a solve_bounded output stays within ~10x its tolerance);
/// quadrature mode evaluates the operator on the interpolated field
/// independently of the scheme.
ResidualReport residual(const GridFunction& u, const ProblemSpec& spec,
                        std::pair<double, double> region,
                        ResidualMode mode = ResidualMode::scheme,
                        double tol = 1e-8);

}  // namespace fhj
