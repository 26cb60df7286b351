#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fhj/domain.hpp"

namespace fhj {

/// A location where a function is not C^2.  `expo` describes the worst local
/// power behaviour |u - u(y -+)| ~ |y - y0|^expo: negative exponents blow up,
/// expo == 0 marks a jump, 0 < expo < 1 a Holder kink, expo >= 1 a mere
/// derivative kink (panel split only, no substitution).
struct Breakpoint {
  double y = 0.0;
  double expo = 1.0;
};

/// Growth envelope |u(y)| <= C (1+|y|)^q used to decide tail integrability.
struct Growth {
  double C = 1.0;
  double q = 0.0;
};

/// One term of an exact power expansion u(y) = sum_k coef_k |y|^{expo_k},
/// valid beyond the hull of the breakpoints on one side of the line.  An
/// empty list means u vanishes identically there.
struct TailTerm {
  double coef = 0.0;
  double expo = 0.0;
};

/// Real function on the whole line with enough metadata for principal-value
/// quadrature: values anywhere, non-smooth points, growth at infinity, and a
/// local C^2 model near evaluation points.
class Field {
 public:
  virtual ~Field() = default;

  virtual double value(double y) const = 0;
  double operator()(double y) const { return value(y); }

  /// first derivative; default central difference at the local scale
  virtual double deriv(double y) const;
  /// second derivative; default central second difference
  virtual double curvature(double y) const;

  /// Symmetrized second difference u(x+z) + u(x-z) - 2u(x).  The default
  /// subtracts the three values; subclasses with closed forms override it to
  /// avoid the catastrophic cancellation that otherwise floods the singular
  /// kernel weight with rounding noise at small z.
  virtual double pair_difference(double x, double z) const {
    return value(x + z) + value(x - z) - 2.0 * value(x);
  }

  virtual std::vector<Breakpoint> breakpoints() const { return {}; }
  virtual Growth growth() const { return {}; }

  /// Exact power expansion for y beyond the breakpoint hull (side = +1 right,
  /// -1 left), or nullopt when no closed form is available and the tail must
  /// be integrated numerically.
  virtual std::optional<std::vector<TailTerm>> tail_terms(int side) const {
    (void)side;
    if (growth().C == 0.0) return std::vector<TailTerm>{};
    return std::nullopt;
  }

  /// Suggested near-field model radius at x; 0 lets the evaluator pick one
  /// from the breakpoint distances.
  virtual double local_scale(double) const { return 0.0; }
};

using FieldPtr = std::shared_ptr<const Field>;

/// Sum of distance powers  sum_k c_k d(x)^{tau_k}  on a domain, vanishing
/// outside.  tau == 0 terms act as c * indicator(domain).  This covers the
/// model profiles d^tau and every barrier used here.
class PowerField : public Field {
 public:
  PowerField(Domain dom, std::vector<double> coef, std::vector<double> tau);

  double value(double y) const override;
  double deriv(double y) const override;
  double curvature(double y) const override;
  double pair_difference(double x, double z) const override;
  std::vector<Breakpoint> breakpoints() const override;
  Growth growth() const override;
  std::optional<std::vector<TailTerm>> tail_terms(int side) const override;

  const Domain& domain() const { return dom_; }
  const std::vector<double>& coef() const { return coef_; }
  const std::vector<double>& tau() const { return tau_; }

 private:
  Domain dom_;
  std::vector<double> coef_;
  std::vector<double> tau_;
  double min_expo_ = 1.0;  // local exponent at the boundary
};

/// single power d^tau
FieldPtr dist_power(const Domain& dom, double tau);

/// Arbitrary callable with optional analytic derivative and metadata.
class CallableField : public Field {
 public:
  using Fn = std::function<double(double)>;

  explicit CallableField(Fn f, Fn df = nullptr, std::vector<Breakpoint> bp = {},
                         Growth g = {}, double scale = 0.5,
                         std::optional<std::vector<TailTerm>> tails = std::nullopt)
      : f_(std::move(f)), df_(std::move(df)), bp_(std::move(bp)), growth_(g),
        scale_(scale), tails_(std::move(tails)) {}

  double value(double y) const override { return f_(y); }
  double deriv(double y) const override { return df_ ? df_(y) : Field::deriv(y); }
  std::vector<Breakpoint> breakpoints() const override { return bp_; }
  Growth growth() const override { return growth_; }
  std::optional<std::vector<TailTerm>> tail_terms(int side) const override {
    return tails_ ? tails_ : Field::tail_terms(side);
  }
  double local_scale(double) const override { return scale_; }

 private:
  Fn f_, df_;
  std::vector<Breakpoint> bp_;
  Growth growth_;
  double scale_;
  std::optional<std::vector<TailTerm>> tails_;
};

/// Zero everywhere.
class ZeroField : public Field {
 public:
  double value(double) const override { return 0.0; }
  double deriv(double) const override { return 0.0; }
  double curvature(double) const override { return 0.0; }
  Growth growth() const override { return {0.0, 0.0}; }
};

FieldPtr zero_field();
FieldPtr constant_field(double c);

/// Piecewise combination: fields[i] owns [edge_{i-1}, edge_i).  Used to
/// splice solver data (grid core, collar profile, outside data).
class PiecewiseField : public Field {
 public:
  PiecewiseField(std::vector<double> edges, std::vector<FieldPtr> parts);

  double value(double y) const override;
  std::vector<Breakpoint> breakpoints() const override;
  Growth growth() const override;
  std::optional<std::vector<TailTerm>> tail_terms(int side) const override;

 private:
  std::vector<double> edges_;
  std::vector<FieldPtr> parts_;
};

/// Function known at grid nodes strictly inside an interval domain, with an
/// analytic rule outside.  Values in between come from local quadratic
/// interpolation anchored at the boundary by the exterior limit, so the
/// represented function is continuous across the boundary.
class GridFunction : public Field {
 public:
  GridFunction(Domain dom, std::vector<double> nodes, std::vector<double> values,
               FieldPtr exterior);

  double value(double y) const override;
  double deriv(double y) const override;
  double curvature(double y) const override;
  std::vector<Breakpoint> breakpoints() const override;
  Growth growth() const override;
  std::optional<std::vector<TailTerm>> tail_terms(int side) const override;
  double local_scale(double x) const override;

  const Domain& domain() const { return dom_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const FieldPtr& exterior() const { return ext_; }

  /// gap width around node i (distance between its flanking neighbours)
  double gap(std::size_t i) const;

 private:
  // quadratic Lagrange basis on points (p0,p1,p2) evaluated at y
  double lagrange(double y, int der) const;

  Domain dom_;
  std::vector<double> nodes_;
  std::vector<double> values_;
  FieldPtr ext_;
  double va_ = 0.0, vb_ = 0.0;  // anchor values at the boundary points
};

}  // namespace fhj
