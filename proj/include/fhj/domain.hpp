#pragma once

#include <vector>

namespace fhj {

/// One-dimensional domain: a bounded open interval (a,b) or the half line
/// (0,inf).  The half line is the model case in which distance powers are
/// exactly scale invariant; the interval is where actual experiments run.
struct Domain {
  enum class Kind { interval, half_line };

  Kind kind = Kind::interval;
  double a = -1.0;
  double b = 1.0;

  static Domain interval(double a, double b);
  static Domain half_line();

  bool inside(double x) const;
  /// distance to the boundary for x inside, 0 outside
  double dist(double x) const;
  /// derivative of dist at interior points (+-1); 0 at the midpoint tie
  double dist_grad(double x) const;
  double diameter() const;  ///< b - a (interval only)
};

/// Build n interior nodes of (a,b).  Gap widths grow geometrically by
/// `ratio` from each endpoint toward the middle; ratio == 1 gives a uniform
/// grid.  Nodes are strictly inside the domain.
std::vector<double> graded_nodes(const Domain& dom, int n, double ratio);

/// Smallest gap of the graded grid above (the gap adjacent to a boundary).
double min_gap(const std::vector<double>& nodes, const Domain& dom);

}  // namespace fhj
