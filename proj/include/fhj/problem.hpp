#pragma once

#include <limits>
#include <string>

#include "fhj/constants.hpp"

namespace fhj {

/// Critical gradient powers for a given order s.  beta stays NaN until a
/// concrete p is chosen (see beta_exponent).
struct Exponents {
  double p0 = 0.0;  // threshold for a positive corrector power
  double p1 = 0.0;  // lower edge of the positive scale band
  double p2 = 0.0;  // boundary between positive and negative scale bands
  double beta = std::numeric_limits<double>::quiet_NaN();
};

Exponents critical_exponents(double s);

/// beta = (2s - p)/(1 - p), defined for p in (1, 2s).
double beta_exponent(double s, double p);

/// Which scale-solution band the pair (s,p) falls in.
enum class ScaleBand { none, positive, negative };
ScaleBand scale_band(double s, double p);

/// Interior source term f.
struct SourceSpec {
  enum class Kind { bounded, power_singular };

  Kind kind = Kind::bounded;
  std::function<double(double)> fn;  // bounded case; empty means f == 0
  double c = 0.0;                    // power case: f = c * d^{-kappa}
  double kappa = 0.0;

  static SourceSpec zero() { return {}; }
  static SourceSpec bounded(std::function<double(double)> f);
  static SourceSpec power(double c, double kappa);

  double value(const Domain& dom, double x) const;
  /// sampled sup of |f| over the region {d >= d_min}
  double sup_interior(const Domain& dom, double d_min = 1e-3) const;
};

/// Dirichlet data on the complement of the domain.
struct ExteriorData {
  enum class Kind { zero, bounded, weighted_integrable };

  Kind kind = Kind::zero;
  std::function<double(double)> fn;

  static ExteriorData zero() { return {}; }
  static ExteriorData bounded(std::function<double(double)> f);
  static ExteriorData weighted(std::function<double(double)> f);

  double value(double y) const { return fn ? fn(y) : 0.0; }
};

/// Grid layout: n interior nodes, geometrically graded toward each boundary
/// with the given gap ratio (1 = uniform).
struct GridSpec {
  std::size_t n = 256;
  double ratio = 1.0;
};

/// One Dirichlet problem instance  -I u + |Du|^p + lambda u = f  in Omega,
/// u = phi outside.  Construction rejects out-of-range (s, p).
struct ProblemSpec {
  double s = 0.75;
  double p = 1.1;
  double lambda = 0.0;
  Domain domain = Domain::interval(-1.0, 1.0);
  GridSpec grid;
  SourceSpec source;
  ExteriorData exterior;
  OperatorSpec op = OperatorSpec::linear(Kernel::unit(0.75));

  ProblemSpec() = default;
  ProblemSpec(double s_, double p_, double lambda_, Domain dom, GridSpec grid_,
              SourceSpec source_, ExteriorData exterior_, OperatorSpec op_);
};

/// Infimum over interior points of the kernel family's exterior mass.
/// Interval domains only; uses closed-form one-sided tail masses plus a
/// golden-section refinement around the scan minimizer.
double lambda0(const OperatorSpec& op, const Domain& dom, std::size_t n_scan = 1024);

struct CheckItem {
  std::string name;
  bool pass = true;
  std::string detail;
};

/// Admissibility report: never throws, lists every check.  `valid` collects
/// the mandatory ones (parameter ranges, lambda vs -lambda0, exterior
/// integrability).
struct ValidationReport {
  bool valid = true;
  double lambda0_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<CheckItem> items;
  std::vector<std::string> cases;  // barrier cases available for (s,p)

  const CheckItem* find(const std::string& name) const;
};

ValidationReport validate_problem(const ProblemSpec& spec);

}  // namespace fhj
