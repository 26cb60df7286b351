#include "fhj/quad.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fhj {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct AdaptCtx {
  double density;     // error allowance per unit width
  long long budget;   // remaining integrand evaluations
};

// One G7/K15 application with bisection fallback.  Boost's error output with
// max_depth == 0 is the estimate for the panel mapped to (-1,1); it is never
// multiplied back by the half-width, so the absolute contribution of a panel
// is 0.5 * (b - a) * err.  The refinement target for a sub-panel is the
// whole-call tolerance scaled by the panel's share of the original width, so
// the budget is spent where it is needed instead of being halved into
// oblivion on one stubborn branch.  Rounding noise in the integrand puts a
// floor under what refinement can achieve; the L1 floor and the evaluation
// budget stop refinement there and leave the leftover estimate visible.
QuadResult adapt(const Fn1& f, double a, double b, AdaptCtx& ctx, int depth) {
  QuadResult r;
  double err_norm = 0.0, l1 = 0.0;
  r.value = GK::integrate(f, a, b, 0, 0.0, &err_norm, &l1);
  r.evals = 15;
  ctx.budget -= 15;
  const double width = b - a;
  r.error = 0.5 * width * err_norm;
  const double target =
      std::max(ctx.density * width,
               4.0 * std::numeric_limits<double>::epsilon() * l1);
  if (!(r.error > target) || depth <= 0 || ctx.budget <= 0 ||
      !(width > 1e-15 * (std::abs(a) + std::abs(b)))) {
    return r;
  }
  const double m = 0.5 * (a + b);
  QuadResult left = adapt(f, a, m, ctx, depth - 1);
  QuadResult right = adapt(f, m, b, ctx, depth - 1);
  left += right;
  left.evals += r.evals;
  return left;
}

}  // namespace

QuadResult integrate(const Fn1& f, double a, double b, double tol) {
  if (!(b > a)) return {};
  AdaptCtx ctx{std::max(tol, 1e-300) / (b - a), 120000};
  return adapt(f, a, b, ctx, 52);
}

QuadResult integrate_power_endpoint(const Fn1& f, double a, double b, double c,
                                    double expo, double tol) {
  if (!(b > a)) return {};
  const double q = 1.0 + expo;          // > 0 since expo > -1
  const double len = b - a;
  const bool at_left = std::abs(c - a) <= std::abs(c - b);
  // t = |x - c| in (0, len];  w = t^q;  dt = (1/q) w^{1/q - 1} dw
  auto g = [&](double w) {
    const double t = std::pow(w, 1.0 / q);
    const double x = at_left ? a + t : b - t;
    // Deep refinement can shrink t below the spacing of doubles at c, where
    // x rounds onto the singular point and f blows up.  The true transformed
    // integrand has a finite limit there; dropping the unrepresentable sliver
    // costs O(w) of one vanishing panel and keeps infinities out of the sum.
    if (x == c) return 0.0;
    return f(x) * std::pow(w, 1.0 / q - 1.0) / q;
  };
  return integrate(g, 0.0, std::pow(len, q), tol);
}

QuadResult integrate_power_weight(const Fn1& g, double a, double b, double c,
                                  double expo, double tol) {
  if (!(b > a)) return {};
  const double q = 1.0 + expo;          // > 0 since expo > -1
  const double len = b - a;
  const bool at_left = std::abs(c - a) <= std::abs(c - b);
  // t = |x - c|;  w = t^q;  |x-c|^expo dx = dw / q exactly
  auto h = [&](double w) {
    const double t = std::pow(w, 1.0 / q);
    const double x = at_left ? a + t : b - t;
    return g(x) / q;
  };
  return integrate(h, 0.0, std::pow(len, q), tol);
}

QuadResult integrate_to_infinity(const Fn1& f, double a, double tol) {
  // z = a + t/(1-t), dz = dt/(1-t)^2, t in [0,1)
  auto g = [&](double t) {
    const double u = 1.0 - t;
    if (u <= 0.0) return 0.0;
    const double z = a + t / u;
    return f(z) / (u * u);
  };
  return integrate(g, 0.0, 1.0, tol);
}

}  // namespace fhj
