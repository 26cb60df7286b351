#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fhj/field.hpp"

namespace fhj {

/// Power fit  u ~ coefficient * d^exponent  near the boundary.  The
/// coefficient is signed (negative when u < 0 on the window); the fit
/// itself runs on log|u| against log d.
struct RateFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_squared = 0.0;
  double d_min = 0.0, d_max = 0.0;  ///< window actually used
  std::size_t n_points = 0;
};

/// Distance window for rate fitting; lo == hi == 0 selects the default
/// [5 * h_min, 1e-2 * diam], h_min the finest node spacing.
struct RateWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Least-squares fit of log|u| vs log d over the grid nodes whose boundary
/// distance falls in the window.  The exponent is the free fitted slope.
/// The coefficient is the amplitude of the power law: against `hypothesis`
/// when given (geometric mean of |u| d^{-hypothesis} -- the robust amplitude
/// at a known theoretical rate, immune to the long extrapolation a slightly
/// tilted slope causes), else the fitted line's own intercept at d = 1.
/// Throws std::invalid_argument when fewer than 6 nodes fall in the window
/// or the window leaves the smooth band of the distance function, and
/// std::runtime_error when u changes sign (or vanishes) inside the window.
RateFit fit_boundary_rate(const GridFunction& u, const Domain& dom,
                          RateWindow window = {},
                          std::optional<double> hypothesis = std::nullopt);

/// Tolerances and window for the family verdict.
struct FamilyCheck {
  double exponent_tol = 0.03;  ///< |exponent + (1-s)| allowed
  double coeff_rtol = 0.05;    ///< |coefficient - t| / |t| allowed
  /// lo == hi == 0 selects [5 * h_min, 2.5e-3 * diam]: tighter than the
  /// generic default because the family's first corrector grows like
  /// d^{gamma + 1 - s} and must stay under the coefficient tolerance
  RateWindow window;
};

struct FamilyVerdict {
  bool ordered = false;   ///< strict nodewise ordering consistent with t
  bool rates_ok = false;  ///< every member fits t * d^{s-1} within tolerance
  bool pass = false;
  std::vector<RateFit> fits;  ///< per member, input order
  std::string detail;         ///< first failure, empty when pass
};

/// Check a one-parameter family of blow-up solutions: members with larger t
/// must dominate strictly at every node, and each member's boundary rate
/// must match exponent s - 1 with signed coefficient t (fit against the
/// hypothesis exponent s - 1).  All members must share the same grid;
/// a single member is trivially ordered and gets the rate check only.
/// Throws std::invalid_argument on empty input or mismatched grids.
FamilyVerdict verify_family(
    const std::vector<std::pair<double, GridFunction>>& members,
    const Domain& dom, double s, const FamilyCheck& check = {});

}  // namespace fhj
